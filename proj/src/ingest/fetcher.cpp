#include "skg/ingest/fetcher.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "skg/core/error.hpp"
#include "skg/core/text.hpp"
#include "skg/parsers/html.hpp"
#include "skg/parsers/selector.hpp"

namespace skg::ingest {

namespace fs = std::filesystem;

std::string Url::origin() const {
  bool default_port = (scheme == "http" && port == 80) || (scheme == "https" && port == 443);
  return scheme + "://" + host + (default_port ? "" : ":" + std::to_string(port));
}

std::string Url::str() const { return origin() + target; }

Url parse_url(std::string_view text) {
  static const std::regex kUrl(R"(^(https?)://([^/:?#]+)(?::(\d+))?([^#]*)(?:#.*)?$)", std::regex::icase);
  std::string s(trim(text));
  std::smatch m;
  if (!std::regex_match(s, m, kUrl)) throw Error(ErrorCode::ValidationError, "not an absolute http(s) URL: " + s);
  Url u;
  u.scheme = to_lower_ascii(m[1].str());
  u.host = to_lower_ascii(m[2].str());
  u.port = m[3].matched ? std::stoi(m[3].str()) : (u.scheme == "https" ? 443 : 80);
  u.target = m[4].str();
  if (u.target.empty() || u.target.front() != '/') u.target = "/" + u.target;
  return u;
}

std::string resolve_url(const Url& base, std::string_view ref_in) {
  std::string ref(trim(ref_in));
  auto hash = ref.find('#');
  if (hash != std::string::npos) ref.erase(hash);
  if (starts_with_icase(ref, "http://") || starts_with_icase(ref, "https://")) return parse_url(ref).str();
  if (ref.starts_with("//")) return parse_url(base.scheme + ":" + ref).str();
  if (ref.starts_with("/")) return base.origin() + ref;
  if (ref.empty()) return base.str();
  std::string path = base.target;
  auto q = path.find('?');
  if (q != std::string::npos) path.erase(q);
  if (ref.starts_with("?")) return base.origin() + path + ref;
  path = path.substr(0, path.find_last_of('/') + 1);
  // Collapse "." and ".." segments.
  std::vector<std::string> segs;
  for (const auto& seg : split(path + ref, '/')) {
    if (seg == ".") continue;
    if (seg == "..") {
      if (!segs.empty()) segs.pop_back();
      continue;
    }
    segs.push_back(seg);
  }
  std::string out;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (segs[i].empty() && i + 1 < segs.size()) continue;
    out += "/" + segs[i];
  }
  if (out.empty()) out = "/";
  return base.origin() + out;
}

HttplibTransport::HttplibTransport(std::chrono::milliseconds timeout) : timeout_(timeout) {}

HttpResponse HttplibTransport::get(const std::string& url) {
  Url u = parse_url(url);
  if (u.scheme != "http") throw Error(ErrorCode::SourceUnavailable, "only plain http is supported: " + url);
  httplib::Client cli(u.host, u.port);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  cli.set_connection_timeout(secs.count(), static_cast<time_t>((timeout_ - secs).count() * 1000));
  cli.set_read_timeout(secs.count(), static_cast<time_t>((timeout_ - secs).count() * 1000));
  cli.set_follow_location(true);
  auto res = cli.Get(u.target);
  if (!res) {
    throw Error(ErrorCode::SourceUnavailable, "no response from " + url + ": " + httplib::to_string(res.error()));
  }
  return {res->status, res->body, res->get_header_value("Content-Type")};
}

std::vector<std::string> discover_listing_links(std::string_view html, const std::vector<std::string>& selectors,
                                                std::string_view base_url) {
  Url base = parse_url(base_url);
  auto doc = parsers::parse_html(html);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& sel_text : selectors) {
    auto sel = parsers::Selector::compile(sel_text);
    for (const auto* node : sel.select(*doc)) {
      auto href = node->attr("href");
      if (trim(href).empty()) continue;
      auto lower = to_lower_ascii(trim(href));
      if (lower.starts_with("javascript:") || lower.starts_with("mailto:")) continue;
      std::string abs;
      try {
        abs = resolve_url(base, href);
      } catch (const Error&) {
        continue;
      }
      if (seen.insert(abs).second) out.push_back(abs);
    }
  }
  return out;
}

std::vector<std::string> discover_feed_links(std::string_view xml, std::string_view base_url) {
  Url base = parse_url(base_url);
  static const std::regex kItem(R"(<(item|entry)\b[^>]*>([\s\S]*?)</\1\s*>)", std::regex::icase);
  static const std::regex kRssLink(R"(<link\s*>\s*(?:<!\[CDATA\[)?([\s\S]*?)(?:\]\]>)?\s*</link\s*>)",
                                   std::regex::icase);
  static const std::regex kAtomLink(R"(<link\b([^>]*)/?>)", std::regex::icase);
  static const std::regex kHref(R"(href\s*=\s*["']([^"']*)["'])", std::regex::icase);
  static const std::regex kRel(R"(rel\s*=\s*["']([^"']*)["'])", std::regex::icase);
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::string s(xml);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kItem); it != std::sregex_iterator(); ++it) {
    std::string body = (*it)[2].str();
    std::string link;
    std::smatch m;
    if (std::regex_search(body, m, kRssLink) && !trim(m[1].str()).empty()) {
      link = parsers::decode_entities(trim(m[1].str()));
    } else {
      for (auto lt = std::sregex_iterator(body.begin(), body.end(), kAtomLink); lt != std::sregex_iterator();
           ++lt) {
        std::string attrs = (*lt)[1].str();
        std::smatch hm;
        std::smatch rm;
        if (!std::regex_search(attrs, hm, kHref)) continue;
        bool alternate = !std::regex_search(attrs, rm, kRel) || iequals(rm[1].str(), "alternate");
        if (alternate) {
          link = parsers::decode_entities(hm[1].str());
          break;
        }
      }
    }
    if (link.empty()) continue;
    try {
      auto abs = resolve_url(base, link);
      if (seen.insert(abs).second) out.push_back(abs);
    } catch (const Error&) {
    }
  }
  return out;
}

bool offline_forced() {
  const char* v = std::getenv("SKG_OFFLINE");
  return v && std::string_view(v) != "" && std::string_view(v) != "0";
}

namespace {

struct Attempted {
  std::optional<HttpResponse> response;
  int attempts = 0;
  std::string error;
};

bool transient_status(int status) { return status >= 500 || status == 429; }

// GET with rate limiting and retries. Counts requests and retries.
Attempted get_with_retry(const std::string& url, const SourceSpec& spec, Transport& transport, Clock& clock,
                         RateLimiter& limiter, std::atomic<std::size_t>& requests,
                         std::atomic<std::size_t>& retries) {
  Attempted out;
  const auto base = std::chrono::duration_cast<Duration>(spec.retry.backoff_base);
  for (int attempt = 1; attempt <= spec.retry.max_attempts; ++attempt) {
    if (attempt > 1) {
      ++retries;
      Duration delay = base * (1LL << std::min(attempt - 2, 20));
      clock.sleep_for(std::min(delay, base * 10));
    }
    limiter.acquire();
    ++requests;
    out.attempts = attempt;
    try {
      HttpResponse r = transport.get(url);
      if (r.status >= 200 && r.status < 300) {
        out.response = std::move(r);
        out.error.clear();
        return out;
      }
      out.error = "HTTP " + std::to_string(r.status);
      if (!transient_status(r.status)) return out;
    } catch (const Error& e) {
      out.error = e.what();
    }
  }
  return out;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FetchResult fetch_local(const SourceSpec& spec, FetchLedger& ledger, const ItemSink& sink, Clock& clock) {
  FetchResult res;
  for (const auto& loc : spec.entry_locators) {
    fs::path dir(loc);
    if (!fs::is_directory(dir)) {
      res.failures.push_back({loc, 1, "directory does not exist"});
      res.source_unavailable = true;
      spdlog::warn("source {}: directory {} does not exist", spec.source_id, loc);
      continue;
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::string rel = fs::relative(f, dir).generic_string();
      std::string locator = "local://" + spec.source_id + "/" + rel;
      ++res.requests;
      std::string bytes;
      try {
        bytes = read_bytes(f);
      } catch (const std::exception& e) {
        res.failures.push_back({locator, 1, e.what()});
        continue;
      }
      std::string hash = sha256_hex(bytes);
      if (!ledger.is_new_or_changed(locator, hash)) {
        ++res.unchanged;
        continue;
      }
      auto key = report_key_from_path(rel);
      FetchedItem item{spec.source_id, locator, key.key, key.page, content_type_for(rel), std::move(bytes),
                       clock.wall(), ""};
      sink(std::move(item));
      ledger.record(locator, hash, clock.wall());
      ++res.delivered;
    }
  }
  return res;
}

FetchResult fetch_http(const SourceSpec& spec, FetchLedger& ledger, const ItemSink& sink, Clock& clock,
                       Transport& transport) {
  FetchResult res;
  RateLimiter limiter(clock, spec.rate_limit);
  std::atomic<std::size_t> requests{0};
  std::atomic<std::size_t> retries{0};
  std::mutex mu;  // guards res and serializes the sink

  std::vector<std::string> links;
  for (const auto& entry : spec.entry_locators) {
    auto got = get_with_retry(entry, spec, transport, clock, limiter, requests, retries);
    if (!got.response) {
      res.failures.push_back({entry, got.attempts, got.error});
      res.source_unavailable = true;
      spdlog::warn("source {}: {} unavailable after {} attempts: {}", spec.source_id, entry, got.attempts,
                   got.error);
      continue;
    }
    try {
      auto found = spec.kind == SourceKind::HttpFeed ? discover_feed_links(got.response->body, entry)
                                                     : discover_listing_links(got.response->body,
                                                                              spec.link_selectors, entry);
      for (auto& l : found) {
        if (std::find(links.begin(), links.end(), l) == links.end()) links.push_back(std::move(l));
      }
    } catch (const Error& e) {
      res.failures.push_back({entry, got.attempts, e.what()});
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < links.size(); i = next++) {
      const auto& url = links[i];
      auto got = get_with_retry(url, spec, transport, clock, limiter, requests, retries);
      std::lock_guard lock(mu);
      if (!got.response) {
        res.failures.push_back({url, got.attempts, got.error});
        spdlog::warn("source {}: giving up on {} after {} attempts: {}", spec.source_id, url, got.attempts,
                     got.error);
        continue;
      }
      std::string hash = sha256_hex(got.response->body);
      if (!ledger.is_new_or_changed(url, hash)) {
        ++res.unchanged;
        continue;
      }
      Url u = parse_url(url);
      std::string path = u.target.substr(0, u.target.find('?'));
      auto key = report_key_from_path(path);
      std::string ctype = got.response->content_type.empty() ? content_type_for(path) : got.response->content_type;
      auto semi = ctype.find(';');
      if (semi != std::string::npos) ctype = std::string(trim(ctype.substr(0, semi)));
      FetchedItem item{spec.source_id, url, u.origin() + key.key, key.page, to_lower_ascii(ctype),
                       std::move(got.response->body), clock.wall(), ""};
      sink(std::move(item));
      ledger.record(url, hash, clock.wall());
      ++res.delivered;
    }
  };
  std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(spec.max_concurrency), std::max<std::size_t>(links.size(), 1));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  res.requests = requests;
  res.retries = retries;
  return res;
}

}  // namespace

FetchResult fetch_source(const SourceSpec& spec, FetchLedger& ledger, const ItemSink& sink, const FetchContext& ctx) {
  validate(spec);
  SystemClock system_clock;
  Clock& clock = ctx.clock ? *ctx.clock : system_clock;
  if (spec.kind == SourceKind::LocalDir) return fetch_local(spec, ledger, sink, clock);
  if (ctx.offline || offline_forced()) {
    spdlog::info("source {}: offline mode, skipping {} source", spec.source_id, to_string(spec.kind));
    return {};
  }
  HttplibTransport default_transport;
  Transport& transport = ctx.transport ? *ctx.transport : default_transport;
  return fetch_http(spec, ledger, sink, clock, transport);
}

std::vector<FetchedItem> fetch_all(const SourceSpec& spec, FetchLedger& ledger, const FetchContext& ctx,
                                   FetchResult* result) {
  std::vector<FetchedItem> items;
  auto r = fetch_source(spec, ledger, [&](FetchedItem it) { items.push_back(std::move(it)); }, ctx);
  if (result) *result = std::move(r);
  return items;
}

}  // namespace skg::ingest
