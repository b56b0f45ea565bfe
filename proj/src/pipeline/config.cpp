#include "skg/pipeline/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "skg/core/error.hpp"
#include "skg/core/text.hpp"
#include "skg/pipeline/toml.hpp"

namespace skg::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(StageKind kind) {
  switch (kind) {
    case StageKind::Porter: return "Porter";
    case StageKind::Checker: return "Checker";
    case StageKind::Parser: return "Parser";
    case StageKind::Extractor: return "Extractor";
    case StageKind::Connector: return "Connector";
  }
  return "?";
}

std::optional<StageKind> stage_kind_from_string(std::string_view name) {
  for (auto k : {StageKind::Porter, StageKind::Checker, StageKind::Parser, StageKind::Extractor,
                 StageKind::Connector}) {
    if (iequals(name, to_string(k))) return k;
  }
  return std::nullopt;
}

int PipelineConfig::workers_for(StageKind kind) const {
  auto it = workers_per_stage.find(kind);
  return it == workers_per_stage.end() ? default_workers : it->second;
}

std::vector<StageDescriptor> default_stages() {
  return {
      {StageKind::Porter, "grouping", json::object()},
      {StageKind::Checker, "duplicate-content-hash", json::object()},
      {StageKind::Checker, "min-text-length", json{{"min_chars", 200}}},
      {StageKind::Checker, "ad-keyword-density", json{{"max_density", 0.04}}},
      {StageKind::Parser, "template", json::object()},
      {StageKind::Extractor, "crf", json::object()},
      {StageKind::Connector, "embedded", json::object()},
  };
}

void validate(const PipelineConfig& config) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::BuildError, msg); };
  int porters = 0;
  int connectors = 0;
  int parsers = 0;
  int last = -1;
  for (const auto& s : config.stages) {
    porters += s.kind == StageKind::Porter;
    connectors += s.kind == StageKind::Connector;
    parsers += s.kind == StageKind::Parser;
    if (static_cast<int>(s.kind) < last) {
      fail("stage '" + s.name + "' (" + std::string(to_string(s.kind)) + ") is out of pipeline order");
    }
    last = static_cast<int>(s.kind);
  }
  if (porters != 1) fail("pipeline needs exactly one Porter, found " + std::to_string(porters));
  if (connectors < 1) fail("pipeline needs at least one Connector");
  if (parsers > 1) fail("pipeline allows at most one Parser");
  if (config.queue_capacity == 0) fail("queue_capacity must be positive");
  if (config.default_workers <= 0) fail("workers must be positive");
  for (const auto& [k, n] : config.workers_per_stage) {
    if (n <= 0) fail("workers for " + std::string(to_string(k)) + " must be positive");
  }
  std::map<std::string, int> ids;
  for (const auto& s : config.sources) {
    if (++ids[s.source_id] > 1) fail("duplicate source_id '" + s.source_id + "'");
  }
}

void apply_override(json& root, std::string_view assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorCode::ValidationError, "override '" + std::string(assignment) + "' is not key=value");
  }
  auto path = split(trim(assignment.substr(0, eq)), '.');
  json value = parse_toml_value_lenient(trim(assignment.substr(eq + 1)));
  json* node = &root;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const std::string& key = path[i];
    bool last = i + 1 == path.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ValidationError, "override path segment '" + key + "' must be an index");
      }
      if (idx >= node->size()) throw Error(ErrorCode::ValidationError, "override index " + key + " out of range");
      node = &(*node)[idx];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) {
        throw Error(ErrorCode::ValidationError, "override path '" + std::string(assignment) + "' crosses a value");
      }
      node = &(*node)[key];
    }
    if (last) *node = value;
  }
}

fs::path data_root() {
  if (const char* env = std::getenv("SKG_DATA_DIR"); env && *env) return env;
#ifdef SKG_SOURCE_DIR
  return SKG_SOURCE_DIR;
#else
  return fs::current_path();
#endif
}

namespace {

std::string resolve_path(const fs::path& base, const std::string& value) {
  if (value.empty()) return value;
  fs::path p(value);
  if (p.is_relative()) p = base / p;
  return p.lexically_normal().string();
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ValidationError, std::string("config key '") + key + "': " + e.what());
  }
}

const json& section(const json& raw, const char* name) {
  static const json kEmpty = json::object();
  if (!raw.contains(name)) return kEmpty;
  const json& s = raw.at(name);
  if (!s.is_object()) throw Error(ErrorCode::ValidationError, std::string("config section [") + name + "] is not a table");
  return s;
}

}  // namespace

AppConfig config_from_json(const json& raw, const fs::path& base_dir) {
  AppConfig cfg;
  cfg.config_dir = base_dir;
  cfg.raw = raw;
  const fs::path data = data_root();

  const json& p = section(raw, "pipeline");
  cfg.pipeline.default_workers = get_or<int>(p, "workers", 4);
  cfg.pipeline.queue_capacity = get_or<std::size_t>(p, "queue_capacity", 256);
  if (p.contains("workers_per_stage")) {
    for (const auto& [k, v] : p.at("workers_per_stage").items()) {
      auto kind = stage_kind_from_string(k);
      if (!kind) throw Error(ErrorCode::ValidationError, "unknown stage kind '" + k + "' in workers_per_stage");
      cfg.pipeline.workers_per_stage[*kind] = v.get<int>();
    }
  }
  if (raw.contains("stages")) {
    for (const auto& s : raw.at("stages")) {
      auto kind_name = get_or<std::string>(s, "kind", "");
      auto kind = stage_kind_from_string(kind_name);
      if (!kind) throw Error(ErrorCode::BuildError, "unknown stage kind '" + kind_name + "'");
      StageDescriptor d{*kind, get_or<std::string>(s, "name", ""), s.value("params", json::object())};
      if (d.name.empty()) throw Error(ErrorCode::BuildError, "stage of kind " + kind_name + " has no name");
      cfg.pipeline.stages.push_back(std::move(d));
    }
  } else {
    cfg.pipeline.stages = default_stages();
  }
  if (raw.contains("sources")) {
    for (const auto& s : raw.at("sources")) {
      cfg.pipeline.sources.push_back(ingest::source_spec_from_json(s, base_dir.string()));
    }
  }

  const json& store = section(raw, "store");
  cfg.store_dir = resolve_path(base_dir, get_or<std::string>(store, "path", "skg-store"));
  cfg.snapshot_every = get_or<std::size_t>(store, "snapshot_every", 10000);
  cfg.fsync = get_or<bool>(store, "fsync", false);

  const json& ledger = section(raw, "ledger");
  cfg.ledger_path = resolve_path(base_dir, get_or<std::string>(ledger, "path", ""));

  const json& parsers = section(raw, "parsers");
  cfg.template_dir = resolve_path(base_dir, get_or<std::string>(parsers, "template_dir", (data / "sources").string()));

  const json& nlp = section(raw, "nlp");
  cfg.gazetteer_dir =
      resolve_path(base_dir, get_or<std::string>(nlp, "gazetteer_dir", (data / "gazetteers").string()));
  cfg.model_path = resolve_path(base_dir, get_or<std::string>(nlp, "model", (data / "models/ner.model").string()));
  cfg.lexicon_path =
      resolve_path(base_dir, get_or<std::string>(nlp, "lexicon", (data / "lexicon/relation_verbs.txt").string()));
  cfg.min_confidence = get_or<double>(nlp, "min_confidence", 0.0);
  if (nlp.contains("lf_weights")) cfg.lf_weights = nlp.at("lf_weights").get<std::map<std::string, double>>();

  const json& fusion = section(raw, "fusion");
  for (const auto& f : get_or<std::vector<std::string>>(fusion, "alias_files",
                                                        {(data / "aliases/curated.txt").string()})) {
    cfg.alias_files.push_back(resolve_path(base_dir, f));
  }
  cfg.structured_aliases = get_or<bool>(fusion, "structured_aliases", true);

  const json& server = section(raw, "server");
  cfg.server.host = get_or<std::string>(server, "host", cfg.server.host);
  cfg.server.port = get_or<int>(server, "port", cfg.server.port);
  cfg.server.default_limit = get_or<std::size_t>(server, "default_limit", cfg.server.default_limit);
  cfg.server.max_limit = get_or<std::size_t>(server, "max_limit", cfg.server.max_limit);

  const json& train = section(raw, "train");
  cfg.train.corpus = resolve_path(base_dir, get_or<std::string>(train, "corpus", (data / "training/corpus.txt").string()));
  cfg.train.gold = resolve_path(base_dir, get_or<std::string>(train, "gold", (data / "fixtures/ner_gold.json").string()));
  cfg.train.model_out = resolve_path(base_dir, get_or<std::string>(train, "model_out", cfg.model_path));
  cfg.train.baseline =
      resolve_path(base_dir, get_or<std::string>(train, "baseline", (data / "models/ner_baseline.json").string()));
  cfg.train.hyper.l2 = get_or<double>(train, "l2", cfg.train.hyper.l2);
  cfg.train.hyper.epochs = get_or<int>(train, "epochs", cfg.train.hyper.epochs);
  cfg.train.hyper.learning_rate = get_or<double>(train, "learning_rate", cfg.train.hyper.learning_rate);
  cfg.train.hyper.seed = get_or<std::uint64_t>(train, "seed", cfg.train.hyper.seed);
  cfg.train.hyper.batch_size = get_or<std::size_t>(train, "batch_size", cfg.train.hyper.batch_size);

  validate(cfg.pipeline);
  return cfg;
}

AppConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  json raw = json::object();
  fs::path base = fs::current_path();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ValidationError, "cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    raw = parse_toml(ss.str());
    base = fs::absolute(path).parent_path();
  }
  for (const auto& o : overrides) apply_override(raw, o);
  return config_from_json(raw, base);
}

}  // namespace skg::pipeline
