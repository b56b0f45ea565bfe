#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "skg/ingest/fetcher.hpp"
#include "skg/kgraph/fusion.hpp"
#include "skg/kgraph/store.hpp"
#include "skg/nlp/crf.hpp"
#include "skg/nlp/extractor.hpp"
#include "skg/nlp/ner_eval.hpp"
#include "skg/pipeline/config.hpp"
#include "skg/pipeline/runner.hpp"

namespace skg::cli {

/// Exit codes of the `skg` command.
enum ExitCode : int { kOk = 0, kValidation = 1, kRuntime = 2 };

/// Gazetteers, verb lexicon and (when the file exists) the CRF model named
/// by the config. Throws GazetteerMissing / MalformedEncoding.
std::shared_ptr<nlp::ExtractorResources> load_extractor_resources(const pipeline::AppConfig& cfg);

kgraph::GraphStore::Options store_options(const pipeline::AppConfig& cfg);

struct SourceFetch {
  std::string source_id;
  ingest::FetchResult result;
};

struct IngestOutcome {
  pipeline::RunStats stats;
  std::vector<SourceFetch> fetches;
  nlohmann::json to_json() const;
};

/// Fetches every configured source, runs the pipeline into `store`, flushes
/// and appends the run to the store's history.
IngestOutcome run_ingest(const pipeline::AppConfig& cfg, kgraph::GraphStore& store,
                         const ingest::FetchContext& fetch_ctx = {});

/// Curated alias files plus, when enabled, groups derived from `aliases`
/// attributes in the graph. Conflicting derived groups are skipped and
/// reported through `skipped`.
kgraph::AliasTable load_alias_table(const pipeline::AppConfig& cfg, const OntologyGraph& graph,
                                    std::vector<std::string>* skipped = nullptr);

/// Weakly labeled training set: the corpus is split into documents on blank
/// lines, each document tokenized and labeled by gazetteer voting.
std::vector<nlp::TrainingExample> build_training_corpus(const std::string& corpus_text,
                                                        const nlp::GazetteerSet& gazetteers,
                                                        const std::map<std::string, double>& lf_weights = {});

/// Scores the text extractor on a gold file, with or without the CRF arm.
nlp::NerScores evaluate_extractor(const std::vector<nlp::GoldSentence>& gold, const nlp::ExtractorResources& res,
                                  bool use_crf);

/// Entry point; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace skg::cli
