#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skg/ingest/source.hpp"
#include "skg/nlp/crf.hpp"

namespace skg::pipeline {

enum class StageKind { Porter, Checker, Parser, Extractor, Connector };

std::string_view to_string(StageKind kind);
std::optional<StageKind> stage_kind_from_string(std::string_view name);

struct StageDescriptor {
  StageKind kind = StageKind::Porter;
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

struct PipelineConfig {
  std::vector<ingest::SourceSpec> sources;
  std::vector<StageDescriptor> stages;
  std::map<StageKind, int> workers_per_stage;
  int default_workers = 4;
  std::size_t queue_capacity = 256;

  int workers_for(StageKind kind) const;
};

/// grouping porter, the three standard checkers, template parser, crf
/// extractor, embedded connector.
std::vector<StageDescriptor> default_stages();

/// Exactly one Porter, at least one Connector, kinds in pipeline order,
/// positive worker counts and capacity. Throws BuildError.
void validate(const PipelineConfig& config);

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t default_limit = 50;
  std::size_t max_limit = 500;
};

struct TrainConfig {
  std::string corpus;  // text file, one document per blank-line-separated block
  std::string gold;    // NER gold JSON for eval-ner
  std::string model_out;
  std::string baseline;  // recorded baseline scores JSON
  nlp::CrfHyper hyper;
};

/// Everything the CLI needs, with paths resolved to absolute form.
struct AppConfig {
  std::filesystem::path config_dir;
  nlohmann::json raw = nlohmann::json::object();

  PipelineConfig pipeline;

  std::string store_dir;
  std::size_t snapshot_every = 10000;
  bool fsync = false;
  std::string ledger_path;  // empty: no persisted ledger

  std::string template_dir;
  std::string gazetteer_dir;
  std::string model_path;  // empty: CRF arm disabled
  std::string lexicon_path;
  std::map<std::string, double> lf_weights;
  double min_confidence = 0.0;

  std::vector<std::string> alias_files;
  bool structured_aliases = true;

  ServerConfig server;
  TrainConfig train;
};

/// Sets a dotted key ("a.b.0.c") to a value parsed as a config value,
/// falling back to a plain string. Throws ValidationError on a malformed
/// `key=value` pair.
void apply_override(nlohmann::json& root, std::string_view assignment);

/// Builds an AppConfig from a parsed tree. Relative paths resolve against
/// `base_dir`; unset paths default to the shipped data under the source tree.
AppConfig config_from_json(const nlohmann::json& raw, const std::filesystem::path& base_dir);

/// Reads the config file (when `path` is non-empty), applies overrides in
/// order, and builds the AppConfig. Throws ValidationError / BuildError.
AppConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Directory holding shipped data (gazetteers, sources, models, ...).
std::filesystem::path data_root();

}  // namespace skg::pipeline
