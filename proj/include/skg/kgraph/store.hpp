#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skg/core/graph.hpp"
#include "skg/kgraph/fusion.hpp"
#include "skg/kgraph/ontology.hpp"

namespace skg::kgraph {

inline constexpr std::uint16_t kStoreFormatVersion = 1;

enum class RecordKind : std::uint8_t { NodeUpsert = 1, EdgeInsert = 2, Fusion = 3 };

struct LoadInfo {
  std::uint64_t generation = 0;
  std::size_t records_replayed = 0;
  std::size_t truncated_bytes = 0;  // partial record dropped from the log tail
  bool stale_log_ignored = false;
};

/// Reads `dir/snapshot.skg` and replays `dir/log.skg`. A missing directory
/// or missing files mean an empty graph. Throws CorruptLog (with offset) on
/// a checksum mismatch and VersionMismatch on a foreign format version.
OntologyGraph load_graph(const std::filesystem::path& dir, LoadInfo* info = nullptr);

/// Writes `graph` as a fresh snapshot with an empty log.
void persist_graph(const OntologyGraph& graph, const std::filesystem::path& dir);

/// Embedded graph store: in-memory graph plus an append-only record log and
/// periodic snapshots. Single writer; readers take immutable views.
class GraphStore {
 public:
  struct Options {
    std::size_t snapshot_every = 10000;  // log records between automatic snapshots; 0 disables
    bool fsync = false;
  };

  static std::unique_ptr<GraphStore> open(const std::filesystem::path& dir, Options opts);
  static std::unique_ptr<GraphStore> open(const std::filesystem::path& dir) { return open(dir, Options{}); }
  ~GraphStore();

  GraphStore(const GraphStore&) = delete;
  GraphStore& operator=(const GraphStore&) = delete;

  MergeDelta merge(const RefactorResult& result);
  FusionReport fuse(const AliasTable& table);

  /// Writes a snapshot and starts a new, empty log generation.
  void snapshot();
  void flush();

  const OntologyGraph& graph() const { return graph_; }
  /// Copy of the current graph, safe to hand to readers.
  std::shared_ptr<const OntologyGraph> view() const;

  const LoadInfo& load_info() const { return load_info_; }
  std::uint64_t generation() const { return generation_; }
  std::size_t log_records() const { return log_records_; }
  const std::filesystem::path& dir() const { return dir_; }

  /// Run history kept in `meta.json` as an array under "runs".
  void append_run(const nlohmann::json& run);
  nlohmann::json runs() const;

 private:
  GraphStore(std::filesystem::path dir, Options opts);
  void append(RecordKind kind, const nlohmann::json& body);
  void open_log_for_append(std::uint64_t valid_size);
  void maybe_snapshot();

  std::filesystem::path dir_;
  Options opts_;
  OntologyGraph graph_;
  LoadInfo load_info_;
  std::uint64_t generation_ = 0;
  std::size_t log_records_ = 0;
  std::FILE* log_ = nullptr;
  mutable std::mutex mu_;
};

}  // namespace skg::kgraph
