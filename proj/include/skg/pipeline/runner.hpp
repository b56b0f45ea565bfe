#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skg/ingest/source.hpp"
#include "skg/pipeline/components.hpp"

namespace skg::pipeline {

struct StageStats {
  std::string name;
  StageKind kind = StageKind::Porter;
  int workers = 1;
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t filtered = 0;
  std::size_t errored = 0;
  double busy_seconds = 0;
};

struct RunStats {
  std::vector<StageStats> stages;  // configured order
  std::size_t items_fetched = 0;
  std::size_t reports_ported = 0;
  std::size_t reports_merged = 0;
  std::map<std::string, std::size_t> filtered;  // rule -> count
  std::vector<ItemError> errors;
  std::map<std::string, std::size_t> queue_high_water;
  std::size_t queue_capacity = 0;
  std::size_t nodes_created = 0;
  std::size_t nodes_unified = 0;
  std::size_t edges_added = 0;
  Timestamp started_at;
  double wall_seconds = 0;
  /// Reports per minute over max(10 s, wall time).
  double reports_per_minute = 0;

  nlohmann::json to_json() const;
};

/// Runs one batch through Porter -> Checkers -> Parser -> Extractors ->
/// Connectors. Checker, parser and extractor stages each get a worker pool
/// sized by the config; connectors run on a single thread and apply
/// records in porter order, so the resulting graph does not depend on the
/// worker counts. Per-item failures are recorded and never abort the run.
/// Throws BuildError / UnknownComponent when the stage list cannot be built.
RunStats run_pipeline(const PipelineConfig& config, const Registry& registry, BuildContext& ctx,
                      std::vector<ingest::FetchedItem> items);

}  // namespace skg::pipeline
