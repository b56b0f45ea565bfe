#include "skg/cli/app.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "skg/core/error.hpp"
#include "skg/core/text.hpp"
#include "skg/kgraph/export.hpp"
#include "skg/nlp/ioc.hpp"
#include "skg/nlp/labeling.hpp"
#include "skg/nlp/tokenizer.hpp"
#include "skg/parsers/source_template.hpp"
#include "skg/pipeline/components.hpp"
#include "skg/query/engine.hpp"
#include "skg/query/server.hpp"

namespace skg::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using pipeline::AppConfig;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view bytes) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + p.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to '" + p.string() + "'");
  }
  fs::rename(tmp, p);
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ValidationError:
    case ErrorCode::BuildError:
    case ErrorCode::UnknownComponent:
    case ErrorCode::DuplicateName:
    case ErrorCode::BadRequest:
    case ErrorCode::SyntaxError:
    case ErrorCode::UnboundVariable:
    case ErrorCode::ConflictingGroup:
    case ErrorCode::GazetteerMissing:
    case ErrorCode::NotFound: return kValidation;
    default: return kRuntime;
  }
}

void setup_logging(const std::string& level) {
  auto logger = spdlog::get("skg");
  if (!logger) logger = spdlog::stderr_color_mt("skg");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

std::shared_ptr<nlp::ExtractorResources> load_extractor_resources(const AppConfig& cfg) {
  auto res = std::make_shared<nlp::ExtractorResources>();
  res->gazetteers = nlp::GazetteerSet::load_dir(cfg.gazetteer_dir);
  if (!cfg.lexicon_path.empty() && fs::exists(cfg.lexicon_path)) res->lexicon = nlp::VerbLexicon::load(cfg.lexicon_path);
  if (!cfg.model_path.empty()) {
    if (fs::exists(cfg.model_path)) {
      res->model = std::make_shared<const nlp::CrfModel>(nlp::deserialize_crf_model(read_file(cfg.model_path)));
    } else {
      spdlog::warn("NER model '{}' not found; CRF extraction disabled", cfg.model_path);
    }
  }
  res->decode.min_confidence = cfg.min_confidence;
  return res;
}

kgraph::GraphStore::Options store_options(const AppConfig& cfg) { return {cfg.snapshot_every, cfg.fsync}; }

json IngestOutcome::to_json() const {
  json j = stats.to_json();
  json sources = json::array();
  for (const auto& f : fetches) {
    json failures = json::array();
    for (const auto& x : f.result.failures) {
      failures.push_back({{"locator", x.locator}, {"attempts", x.attempts}, {"message", x.message}});
    }
    sources.push_back({{"source_id", f.source_id},
                       {"delivered", f.result.delivered},
                       {"unchanged", f.result.unchanged},
                       {"requests", f.result.requests},
                       {"retries", f.result.retries},
                       {"source_unavailable", f.result.source_unavailable},
                       {"failures", failures}});
  }
  j["sources"] = sources;
  return j;
}

IngestOutcome run_ingest(const AppConfig& cfg, kgraph::GraphStore& store, const ingest::FetchContext& fetch_ctx) {
  IngestOutcome outcome;
  auto ledger = cfg.ledger_path.empty() ? ingest::FetchLedger() : ingest::FetchLedger(cfg.ledger_path);
  std::vector<ingest::FetchedItem> items;
  for (const auto& spec : cfg.pipeline.sources) {
    SourceFetch f{spec.source_id, {}};
    auto got = ingest::fetch_all(spec, ledger, fetch_ctx, &f.result);
    if (f.result.source_unavailable) spdlog::warn("source '{}' unavailable", spec.source_id);
    for (const auto& fail : f.result.failures) spdlog::warn("fetch {} failed: {}", fail.locator, fail.message);
    for (auto& it : got) items.push_back(std::move(it));
    outcome.fetches.push_back(std::move(f));
  }

  pipeline::Registry registry;
  pipeline::register_builtin_components(registry);
  pipeline::BuildContext ctx;
  ctx.config = &cfg;
  ctx.store = &store;
  ctx.nlp = load_extractor_resources(cfg);
  ctx.templates = std::make_shared<const parsers::TemplateSet>(parsers::TemplateSet::load_dir(cfg.template_dir));

  outcome.stats = pipeline::run_pipeline(cfg.pipeline, registry, ctx, std::move(items));
  store.flush();
  store.append_run(outcome.to_json());
  return outcome;
}

kgraph::AliasTable load_alias_table(const AppConfig& cfg, const OntologyGraph& graph,
                                    std::vector<std::string>* skipped) {
  kgraph::AliasTable table;
  for (const auto& f : cfg.alias_files) {
    if (!fs::exists(f)) {
      spdlog::warn("alias file '{}' not found", f);
      continue;
    }
    auto more = kgraph::AliasTable::load_file(f);
    for (auto& s : table.absorb(more)) {
      spdlog::warn("alias group {} conflicts with an earlier group; skipped", s);
      if (skipped) skipped->push_back(s);
    }
  }
  if (cfg.structured_aliases) {
    for (auto& s : table.absorb(kgraph::AliasTable::from_graph(graph))) {
      spdlog::info("derived alias group {} conflicts with a curated group; skipped", s);
      if (skipped) skipped->push_back(s);
    }
  }
  return table;
}

std::vector<nlp::TrainingExample> build_training_corpus(const std::string& corpus_text,
                                                        const nlp::GazetteerSet& gazetteers,
                                                        const std::map<std::string, double>& lf_weights) {
  auto lfs = nlp::make_labeling_functions(gazetteers, lf_weights);
  std::vector<nlp::TrainingExample> out;
  std::istringstream in(corpus_text);
  std::string line;
  std::string doc;
  auto flush = [&] {
    if (skg::trim(doc).empty()) {
      doc.clear();
      return;
    }
    auto ts = nlp::tokenize(nlp::protect_iocs(doc));
    auto syn = nlp::synthesize_labels(ts, lfs);
    out.push_back({std::move(ts), std::move(syn.labels)});
    doc.clear();
  };
  while (std::getline(in, line)) {
    if (skg::trim(line).empty()) {
      flush();
    } else {
      doc += line;
      doc += '\n';
    }
  }
  flush();
  return out;
}

nlp::NerScores evaluate_extractor(const std::vector<nlp::GoldSentence>& gold, const nlp::ExtractorResources& res,
                                  bool use_crf) {
  return nlp::evaluate_ner(gold, [&](const std::string& text) { return nlp::extract_text_entities(text, res, use_crf); });
}

namespace {

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string log_level = "warn";
};

void print_run(std::ostream& out, const IngestOutcome& o) {
  const auto& s = o.stats;
  std::size_t filtered = 0;
  for (const auto& [rule, n] : s.filtered) filtered += n;
  out << fmt::format("fetched {} items from {} sources\n", s.items_fetched, o.fetches.size());
  out << fmt::format("reports: {} ported, {} merged, {} filtered, {} errors\n", s.reports_ported, s.reports_merged,
                     filtered, s.errors.size());
  for (const auto& [rule, n] : s.filtered) out << fmt::format("  filtered by {}: {}\n", rule, n);
  out << fmt::format("graph delta: {} nodes created, {} unified, {} edges added\n", s.nodes_created, s.nodes_unified,
                     s.edges_added);
  for (const auto& st : s.stages) {
    out << fmt::format("  stage {:<10} {:<24} workers={} in={} out={} filtered={} errored={} busy={:.3f}s\n",
                       pipeline::to_string(st.kind), st.name, st.workers, st.in, st.out, st.filtered, st.errored,
                       st.busy_seconds);
  }
  out << fmt::format("wall time {:.3f}s, throughput {:.1f} reports/min\n", s.wall_seconds, s.reports_per_minute);
}

std::shared_ptr<const query::QueryEngine> engine_for(const AppConfig& cfg) {
  auto store = kgraph::GraphStore::open(cfg.store_dir, store_options(cfg));
  return std::make_shared<const query::QueryEngine>(store->view(), store->runs(),
                                                    query::Limits{cfg.server.default_limit, cfg.server.max_limit});
}

json scores_summary(const nlp::NerScores& s) {
  json j = s.to_json();
  j["ner_micro_f1"] = s.micro(nlp::ner_types()).f1();
  return j;
}

int cmd_serve(const AppConfig& cfg, const std::string& ui_dir, std::ostream& out) {
  // Block termination signals before the server spawns its threads so a
  // dedicated waiter can receive them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  query::ApiServer server(engine_for(cfg));
  if (!ui_dir.empty()) server.mount_static(ui_dir);
  int port = server.start(cfg.server.host, cfg.server.port);
  out << fmt::format("listening on http://{}:{}\n", cfg.server.host, port) << std::flush;
  int sig = 0;
  sigwait(&set, &sig);
  spdlog::info("signal {} received; draining", sig);
  server.stop();
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SecurityKG: threat-intelligence knowledge graph builder", "skg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "skg 1.0.0");
  Common common;
  app.add_option("-c,--config", common.config, "TOML config file");
  app.add_option("--set", common.overrides, "Override a config key (dotted.key=value); repeatable");
  app.add_option("--log-level", common.log_level, "trace, debug, info, warn, error")->capture_default_str();

  auto* ingest = app.add_subcommand("ingest", "Fetch configured sources and build the graph");
  bool ingest_json = false;
  ingest->add_flag("--json", ingest_json, "Print run statistics as JSON");
  bool offline = false;
  ingest->add_flag("--offline", offline, "Skip HTTP sources");

  auto* train = app.add_subcommand("train-ner", "Train the CRF model on the weakly labeled corpus");
  std::string train_corpus;
  std::string train_out;
  train->add_option("--corpus", train_corpus, "Corpus text file");
  train->add_option("--out", train_out, "Where to write the model");

  auto* eval = app.add_subcommand("eval-ner", "Score the extractor on a gold file");
  std::string eval_gold;
  bool record_baseline = false;
  bool check_baseline = false;
  eval->add_option("--gold", eval_gold, "Gold JSON file");
  eval->add_flag("--record-baseline", record_baseline, "Write the current scores as the baseline");
  eval->add_flag("--check", check_baseline, "Fail when the model scores below the recorded baseline");

  auto* fuse = app.add_subcommand("fuse", "Apply alias fusion to the stored graph");
  bool fuse_json = false;
  fuse->add_flag("--json", fuse_json, "Print the fusion report as JSON");

  auto* serve = app.add_subcommand("serve", "Serve the query API");
  std::string ui_dir;
  serve->add_option("--ui", ui_dir, "Directory of static explorer assets served under /ui/");

  auto* exp = app.add_subcommand("export", "Write the graph as NDJSON");
  std::string export_out;
  exp->add_option("-o,--out", export_out, "Output file (default: standard output)");

  auto* stats = app.add_subcommand("stats", "Print graph and run statistics as JSON");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kValidation;
  }

  try {
    setup_logging(common.log_level);
    AppConfig cfg = pipeline::load_config(common.config, common.overrides);

    if (*ingest) {
      auto store = kgraph::GraphStore::open(cfg.store_dir, store_options(cfg));
      ingest::FetchContext ctx;
      ctx.offline = offline;
      auto outcome = run_ingest(cfg, *store, ctx);
      if (ingest_json) {
        out << outcome.to_json().dump(2) << "\n";
      } else {
        print_run(out, outcome);
        out << fmt::format("graph: {} nodes, {} edges\n", store->graph().node_count(), store->graph().edge_count());
      }
      return kOk;
    }

    if (*train) {
      auto res = load_extractor_resources(cfg);
      std::string corpus_path = train_corpus.empty() ? cfg.train.corpus : train_corpus;
      std::string out_path = train_out.empty() ? cfg.train.model_out : train_out;
      auto corpus = build_training_corpus(read_file(corpus_path), res->gazetteers, cfg.lf_weights);
      nlp::FeatureExtractor fe(nlp::FeatureExtractor::default_templates(), &res->gazetteers);
      auto model = nlp::crf_train(corpus, fe, cfg.train.hyper);
      write_file(out_path, nlp::serialize(model));
      out << fmt::format("trained on {} documents: {} features, {} labels, {} epochs\n", corpus.size(),
                         model.features().size(), model.labels().size(), model.loss_history.size());
      if (!model.loss_history.empty()) {
        out << fmt::format("objective {:.6f} -> {:.6f}\n", model.loss_history.front(), model.loss_history.back());
      }
      out << "model written to " << out_path << "\n";
      return kOk;
    }

    if (*eval) {
      auto res = load_extractor_resources(cfg);
      if (!res->model) throw Error(ErrorCode::ValidationError, "no NER model at '" + cfg.model_path + "'");
      auto gold = nlp::load_ner_gold(eval_gold.empty() ? cfg.train.gold : eval_gold);
      auto crf = evaluate_extractor(gold, *res, true);
      auto regex = evaluate_extractor(gold, *res, false);
      json report = {{"model", scores_summary(crf)}, {"regex_only", scores_summary(regex)}};
      out << report.dump(2) << "\n";
      if (record_baseline) {
        json baseline = {{"micro_f1", crf.micro().f1()}, {"ner_micro_f1", crf.micro(nlp::ner_types()).f1()}};
        for (const auto& [t, c] : crf.per_type) baseline["per_type_f1"][std::string(to_string(t))] = c.f1();
        write_file(cfg.train.baseline, baseline.dump(2) + "\n");
        out << "baseline written to " << cfg.train.baseline << "\n";
      }
      if (check_baseline) {
        auto baseline = json::parse(read_file(cfg.train.baseline));
        double want = baseline.at("micro_f1").get<double>();
        double got = crf.micro().f1();
        if (got + 1e-12 < want) {
          err << fmt::format("NER micro F1 {:.4f} is below the baseline {:.4f}\n", got, want);
          return kRuntime;
        }
      }
      return kOk;
    }

    if (*fuse) {
      auto store = kgraph::GraphStore::open(cfg.store_dir, store_options(cfg));
      auto table = load_alias_table(cfg, store->graph());
      auto report = store->fuse(table);
      store->flush();
      if (fuse_json) {
        out << report.to_json().dump(2) << "\n";
      } else {
        out << fmt::format("{} alias groups, {} applied, {} nodes fused away\n", table.groups().size(),
                           report.groups_applied(), report.nodes_removed());
        out << fmt::format("graph: {} nodes, {} edges\n", store->graph().node_count(), store->graph().edge_count());
      }
      return kOk;
    }

    if (*serve) return cmd_serve(cfg, ui_dir, out);

    if (*exp) {
      auto graph = kgraph::load_graph(cfg.store_dir);
      std::size_t lines = 0;
      if (export_out.empty()) {
        lines = kgraph::export_ndjson(graph, out);
      } else {
        std::ostringstream buf;
        lines = kgraph::export_ndjson(graph, buf);
        write_file(export_out, buf.str());
      }
      err << fmt::format("exported {} lines ({} nodes, {} edges)\n", lines, graph.node_count(), graph.edge_count());
      return kOk;
    }

    if (*stats) {
      out << engine_for(cfg)->stats().dump(2) << "\n";
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}

}  // namespace skg::cli
