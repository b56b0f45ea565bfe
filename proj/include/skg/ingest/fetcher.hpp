#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "skg/ingest/clock.hpp"
#include "skg/ingest/ledger.hpp"
#include "skg/ingest/source.hpp"

namespace skg::ingest {

struct Url {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 80;
  std::string target;  // path plus query, starts with '/'

  std::string origin() const;  // scheme://host[:port]
  std::string str() const;
};

/// Throws ValidationError for anything other than an absolute http(s) URL.
Url parse_url(std::string_view text);
/// Resolves `ref` (absolute, scheme-relative, root-relative or relative)
/// against `base`.
std::string resolve_url(const Url& base, std::string_view ref);

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string content_type;
};

/// GET transport. Throws SourceUnavailable when no response was received.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse get(const std::string& url) = 0;
};

/// Transport over cpp-httplib (plain http only).
class HttplibTransport final : public Transport {
 public:
  explicit HttplibTransport(std::chrono::milliseconds timeout = std::chrono::milliseconds(10000));
  HttpResponse get(const std::string& url) override;

 private:
  std::chrono::milliseconds timeout_;
};

/// Report links in a listing page, in document order, deduplicated, resolved
/// against `base_url`.
std::vector<std::string> discover_listing_links(std::string_view html, const std::vector<std::string>& selectors,
                                                std::string_view base_url);
/// Item links of an RSS 2.0 or Atom feed, in document order.
std::vector<std::string> discover_feed_links(std::string_view xml, std::string_view base_url);

struct FetchFailure {
  std::string locator;
  int attempts = 0;
  std::string message;
};

struct FetchResult {
  std::size_t delivered = 0;
  std::size_t unchanged = 0;
  std::size_t requests = 0;
  std::size_t retries = 0;
  std::vector<FetchFailure> failures;
  bool source_unavailable = false;
};

using ItemSink = std::function<void(FetchedItem)>;

struct FetchContext {
  Clock* clock = nullptr;          // defaults to a SystemClock
  Transport* transport = nullptr;  // defaults to HttplibTransport for HTTP kinds
  bool offline = false;            // skip HTTP kinds; also forced by SKG_OFFLINE=1
};

/// Fetches one source. Items whose content hash matches the ledger are
/// skipped. Each delivered item goes to `sink` and is recorded in the ledger
/// only after the sink returns, so an interrupted fetch leaves the ledger
/// unchanged for unfinished locators. Transient failures (no response, 5xx,
/// 429) are retried with exponential backoff capped at 10x the base; other
/// failures and exhausted retries are recorded and the fetch continues.
FetchResult fetch_source(const SourceSpec& spec, FetchLedger& ledger, const ItemSink& sink,
                         const FetchContext& ctx = {});

/// Convenience: collects all delivered items.
std::vector<FetchedItem> fetch_all(const SourceSpec& spec, FetchLedger& ledger, const FetchContext& ctx = {},
                                   FetchResult* result = nullptr);

bool offline_forced();

}  // namespace skg::ingest
