// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>

#include <fmt/core.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "crf_oracle.hpp"
#include "graph_gen.hpp"
#include "skg/cli/app.hpp"
#include "skg/core/error.hpp"
#include "skg/core/text.hpp"
#include "skg/kgraph/store.hpp"
#include "skg/nlp/ioc.hpp"
#include "skg/nlp/tokenizer.hpp"
#include "skg/parsers/source_template.hpp"
#include "skg/query/engine.hpp"
#include "skg/query/server.hpp"
#include "support.hpp"

// Must follow the Eigen includes.
#include <httplib.h>

namespace fs = std::filesystem;
using namespace skg;
using nlohmann::json;
using SteadyClock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double since(SteadyClock::time_point t0) { return std::chrono::duration<double>(SteadyClock::now() - t0).count(); }

pipeline::AppConfig fixture_config(const fs::path& store, int workers) {
  return pipeline::load_config(test::source_dir() / "fixtures/config.toml",
                               {"store.path=" + store.string(), "ledger.path=",
                                "pipeline.workers=" + std::to_string(workers)});
}

json gold_counts() { return json::parse(test::read_file(test::source_dir() / "fixtures/gold_counts.json")); }

json nonzero(const json& counts) {
  json out = json::object();
  for (const auto& [k, v] : counts.items()) {
    if (v.get<std::size_t>() > 0) out[k] = v;
  }
  return out;
}

// ---------------------------------------------------------------- 1

struct IngestedStore {
  test::TempDir dir;
  std::unique_ptr<kgraph::GraphStore> store;
};

Verdict c1_fixture_counts(IngestedStore& s) {
  Verdict v;
  auto gold = gold_counts();
  auto cfg = fixture_config(s.dir / "store", 4);
  auto t0 = SteadyClock::now();
  s.store = kgraph::GraphStore::open(cfg.store_dir, cli::store_options(cfg));
  auto outcome = cli::run_ingest(cfg, *s.store);
  double secs = since(t0);
  query::QueryEngine engine(s.store->view(), s.store->runs());
  auto st = engine.stats();
  v.require(outcome.stats.reports_merged >= 20, fmt::format("only {} reports", outcome.stats.reports_merged));
  v.require(outcome.stats.reports_merged == gold["reports"].get<std::size_t>(), "report count differs from gold");
  v.require(nonzero(st["nodes_by_type"]) == gold["nodes_by_type"], "node counts per type differ from gold");
  v.require(nonzero(st["edges_by_verb"]) == gold["edges_by_verb"], "edge counts per verb differ from gold");
  v.require(secs < 30.0, fmt::format("took {:.2f}s", secs));
  v.detail = v.detail.empty() ? fmt::format("{} reports, {} nodes, {} edges in {:.2f}s", outcome.stats.reports_merged,
                                            st["nodes"].get<std::size_t>(), st["edges"].get<std::size_t>(), secs)
                              : v.detail;
  return v;
}

// ---------------------------------------------------------------- 2, 3

json get_json(httplib::Client& cli, const std::string& path) {
  auto r = cli.Get(path);
  if (!r) throw std::runtime_error("no response for " + path);
  if (r->status != 200) throw std::runtime_error(fmt::format("{} returned {}", path, r->status));
  return json::parse(r->body);
}

Verdict c2_search_equals_query(httplib::Client& cli) {
  Verdict v;
  auto search = get_json(cli, "/search?q=wannacry");
  auto r = cli.Post("/query", json{{"query", "match(n) where n.name = \"wannacry\" return n"}}.dump(),
                    "application/json");
  v.require(r && r->status == 200, "query request failed");
  if (!v.pass) return v;
  auto query = json::parse(r->body);
  v.require(!search["nodes"].empty(), "search found nothing");
  v.require(query["nodes"].size() == 1, fmt::format("query returned {} nodes", query["nodes"].size()));
  if (!v.pass) return v;
  auto sid = search["nodes"][0]["id"].get<std::string>();
  auto qid = query["nodes"][0]["id"].get<std::string>();
  v.require(sid == qid, "search " + sid + " vs query " + qid);
  if (v.pass) v.detail = "node " + sid;
  return v;
}

Verdict c3_cozyduke_neighbors(httplib::Client& cli) {
  Verdict v;
  auto search = get_json(cli, "/search?q=cozyduke");
  std::string start_id;
  for (const auto& n : search["nodes"]) {
    if (n["etype"] == "ThreatActor" && n["description"] == "cozyduke") start_id = n["id"].get<std::string>();
  }
  v.require(!start_id.empty(), "search results lack the CozyDuke ThreatActor");
  if (!v.pass) return v;
  auto hop1 = get_json(cli, "/nodes/" + start_id + "/neighbors");
  std::vector<std::string> techniques;
  for (const auto& n : hop1["nodes"]) {
    if (n["etype"] == "Technique") techniques.push_back(n["id"].get<std::string>());
  }
  std::set<std::string> actors;
  for (const auto& t : techniques) {
    const json hop2 = get_json(cli, "/nodes/" + t + "/neighbors");
    for (const auto& m : hop2["nodes"]) {
      if (m["etype"] == "ThreatActor" && m["id"] != start_id) actors.insert(m["description"].get<std::string>());
    }
  }
  v.require(!techniques.empty(), "no Technique neighbor");
  v.require(!actors.empty(), "no second ThreatActor sharing a technique");
  if (v.pass) {
    v.detail = fmt::format("{} technique neighbor(s); actors sharing one: {}", techniques.size(),
                           fmt::join(actors.begin(), actors.end(), ", "));
  }
  return v;
}

// ---------------------------------------------------------------- 4

Verdict c4_crf_oracle() {
  Verdict v;
  auto t0 = SteadyClock::now();
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<std::size_t> len(1, 6);
  std::uniform_int_distribution<std::size_t> labels(2, 4);
  double worst_z = 0.0;
  int viterbi_bad = 0;
  for (int i = 0; i < 100; ++i) {
    auto m = test::random_crf(rng, labels(rng), 8);
    auto x = test::random_seq(rng, len(rng), 8);
    auto bf = test::brute_force(m, x);
    if (m.viterbi(x).path != bf.argmax) ++viterbi_bad;
    worst_z = std::max(worst_z, test::rel_err(m.log_partition(x), bf.log_z));
  }
  v.require(viterbi_bad == 0, fmt::format("{} Viterbi mismatches", viterbi_bad));
  v.require(worst_z <= 1e-8, fmt::format("logZ rel err {:.3g}", worst_z));

  double worst_g = 0.0;
  const double h = 1e-5;
  const double l2 = 0.1;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 r(seed);
    auto m = test::random_crf(r, 3, 5);
    std::vector<nlp::LabeledSeq> data;
    for (int k = 0; k < 3; ++k) {
      nlp::LabeledSeq s;
      s.x = test::random_seq(r, 1 + r() % 5, 5);
      for (std::size_t t = 0; t < s.x.size(); ++t) s.y.push_back(static_cast<int>(r() % 3));
      data.push_back(std::move(s));
    }
    Eigen::MatrixXd gW = Eigen::MatrixXd::Zero(m.W().rows(), m.W().cols());
    Eigen::MatrixXd gT = Eigen::MatrixXd::Zero(m.T().rows(), m.T().cols());
    nlp::crf_objective_gradient(m, data, l2, gW, gT);
    auto probe = [&](Eigen::MatrixXd& P, const Eigen::MatrixXd& G) {
      for (Eigen::Index i = 0; i < P.size(); ++i) {
        const double orig = P.data()[i];
        P.data()[i] = orig + h;
        const double up = nlp::crf_objective(m, data, l2);
        P.data()[i] = orig - h;
        const double down = nlp::crf_objective(m, data, l2);
        P.data()[i] = orig;
        worst_g = std::max(worst_g, std::abs((up - down) / (2 * h) - G.data()[i]));
      }
    };
    probe(m.W(), gW);
    probe(m.T(), gT);
  }
  v.require(worst_g <= 1e-5, fmt::format("gradient err {:.3g}", worst_g));
  double secs = since(t0);
  v.require(secs < 60.0, fmt::format("took {:.1f}s", secs));
  if (v.pass) {
    v.detail = fmt::format("100 instances, logZ rel err {:.2g}; 10 seeds, gradient err {:.2g}; {:.2f}s", worst_z,
                           worst_g, secs);
  }
  return v;
}

// ---------------------------------------------------------------- 5

struct IocCheck {
  std::size_t strings = 0;
  std::size_t iocs = 0;
  std::size_t restore_failures = 0;
  std::size_t surface_failures = 0;
  std::size_t splits = 0;
  std::vector<std::string> examples;

  void note(const std::string& s) {
    if (examples.size() < 3) examples.push_back(s);
  }
};

// Checks a text whose IOC spans are known: every span must be one IOC token.
void check_text(IocCheck& c, const std::string& text, const std::vector<CharSpan>& truth) {
  ++c.strings;
  auto pt = nlp::protect_iocs(text);
  if (nlp::restore(pt) != text) {
    ++c.restore_failures;
    c.note("restore: " + text);
  }
  auto ts = nlp::tokenize(pt);
  for (const auto& t : ts.tokens) {
    if (t.span.end > text.size() || text.compare(t.span.start, t.span.length(), t.surface) != 0) {
      ++c.surface_failures;
      c.note("surface: " + t.surface);
    }
  }
  for (const auto& span : truth) {
    ++c.iocs;
    std::size_t exact = 0;
    std::size_t partial = 0;
    for (const auto& t : ts.tokens) {
      bool overlaps = t.span.start < span.end && span.start < t.span.end;
      if (!overlaps) continue;
      if (t.span == span && t.is_ioc()) {
        ++exact;
      } else {
        ++partial;
      }
    }
    if (exact != 1 || partial != 0) {
      ++c.splits;
      c.note("split: " + text.substr(span.start, span.length()));
    }
  }
}

class IocGen {
 public:
  explicit IocGen(std::uint64_t seed) : rng_(seed) {}

  std::string sample() {
    switch (pick(10)) {
      case 0: return ip();
      case 1: return domain();
      case 2: return url();
      case 3: return word() + (pick(2) ? "@" : "[@]") + domain();
      case 4: return hex(32);
      case 5: return hex(40);
      case 6: return hex(64);
      case 7: return path();
      case 8: return registry();
      default: return word() + one_of({".exe", ".dll", ".dat", ".ps1", ".docm", ".zip"});
    }
  }

  /// Prose with 1..4 injected IOCs; returns the text and the true IOC spans.
  std::pair<std::string, std::vector<CharSpan>> sentence() {
    std::string s;
    std::vector<CharSpan> spans;
    int n_iocs = 1 + static_cast<int>(pick(4));
    int words = 4 + static_cast<int>(pick(20));
    std::set<int> slots;
    while (static_cast<int>(slots.size()) < n_iocs) slots.insert(static_cast<int>(pick(words)));
    for (int i = 0; i < words; ++i) {
      if (!s.empty()) s += pick(5) == 0 ? ", " : " ";
      if (slots.count(i)) {
        bool paren = pick(6) == 0;
        if (paren) s += "(";
        std::string ioc = sample();
        spans.push_back({s.size(), s.size() + ioc.size()});
        s += ioc;
        if (paren) s += ")";
      } else {
        std::string w = word();
        if (i == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
        s += w;
      }
    }
    s += pick(3) == 0 ? "!" : ".";
    return {s, spans};
  }

 private:
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  std::string one_of(std::initializer_list<const char*> xs) { return *(xs.begin() + pick(xs.size())); }
  std::string word() {
    static const char* kWords[] = {"the",    "actor",  "loader", "beacon", "payload", "stage", "server",
                                   "victim", "update", "dropped", "queried", "later",  "then",  "via",
                                   "group",  "sample", "implant", "connects", "host",  "config"};
    return kWords[pick(std::size(kWords))];
  }
  std::string label() {
    std::string s;
    std::size_t n = 3 + pick(8);
    for (std::size_t i = 0; i < n; ++i) s += "abcdefghijklmnopqrstuvwxyz0123456789"[pick(i == 0 ? 26 : 36)];
    return s;
  }
  std::string dot() { return pick(3) == 0 ? "[.]" : "."; }
  std::string domain() {
    std::string d = label();
    if (pick(3) == 0) d += "-" + label();
    if (pick(4) == 0) d = label() + "." + d;
    return d + dot() + one_of({"com", "net", "org", "info", "ru", "io", "xyz", "top"});
  }
  std::string ip() {
    std::string s;
    for (int i = 0; i < 4; ++i) {
      if (i) s += i == 3 ? dot() : ".";
      s += std::to_string(1 + pick(254));
    }
    return s;
  }
  std::string url() {
    std::string s = one_of({"http://", "https://", "hxxp://", "hxxps://"}) + (pick(4) == 0 ? ip() : domain());
    if (pick(3) == 0) s += ":" + std::to_string(1024 + pick(60000));
    s += "/" + label();
    if (pick(2)) s += "/" + label() + one_of({".php", ".bin", ".js", ".html"});
    if (pick(3) == 0) s += "?id=" + std::to_string(pick(1000));
    return s;
  }
  std::string hex(std::size_t n) {
    std::string s;
    bool upper = pick(4) == 0;
    for (std::size_t i = 0; i < n; ++i) s += (upper ? "0123456789ABCDEF" : "0123456789abcdef")[pick(16)];
    return s;
  }
  std::string path() {
    switch (pick(3)) {
      case 0: return "C:\\" + one_of({"Windows", "ProgramData", "Users\\Public"}) + "\\" + label() + ".exe";
      case 1: return "%APPDATA%\\" + label() + "\\" + label() + ".dll";
      default: return "/" + one_of({"tmp", "var/tmp", "usr/lib"}) + "/" + label() + ".so";
    }
  }
  std::string registry() {
    return one_of({"HKLM", "HKCU", "HKEY_LOCAL_MACHINE"}) + std::string("\\Software\\") + label() + "\\" + label();
  }

  std::mt19937_64 rng_;
};

// Captures parsed records instead of writing a graph.
class CaptureConnector final : public pipeline::Connector {
 public:
  explicit CaptureConnector(std::vector<CtiRecord>* out) : out_(out) {}
  kgraph::MergeDelta connect(const CtiRecord& rec) override {
    out_->push_back(rec);
    return {};
  }

 private:
  std::vector<CtiRecord>* out_;
};

std::vector<CtiRecord> fixture_records() {
  test::TempDir dir;
  auto cfg = fixture_config(dir / "store", 1);
  std::vector<CtiRecord> records;
  pipeline::Registry reg;
  pipeline::register_builtin_components(reg);
  reg.register_component(pipeline::StageKind::Connector, "capture",
                         [&records](const pipeline::StageDescriptor&, pipeline::BuildContext&) {
                           return std::make_unique<CaptureConnector>(&records);
                         });
  for (auto& s : cfg.pipeline.stages) {
    if (s.kind == pipeline::StageKind::Connector) s.name = "capture";
  }
  ingest::FetchLedger ledger;
  std::vector<ingest::FetchedItem> items;
  for (const auto& spec : cfg.pipeline.sources) {
    for (auto& it : ingest::fetch_all(spec, ledger)) items.push_back(std::move(it));
  }
  pipeline::BuildContext ctx;
  ctx.config = &cfg;
  ctx.nlp = cli::load_extractor_resources(cfg);
  ctx.templates = std::make_shared<const parsers::TemplateSet>(parsers::TemplateSet::load_dir(cfg.template_dir));
  pipeline::run_pipeline(cfg.pipeline, reg, ctx, std::move(items));
  return records;
}

// True when `needle` occurs delimited by whitespace, brackets or sentence punctuation.
bool standalone_in(const std::string& hay, const std::string& needle) {
  auto delim = [](char c) { return std::isspace(static_cast<unsigned char>(c)) || std::strchr("()[]<>\"',;!", c); };
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
    bool left = pos == 0 || delim(hay[pos - 1]);
    std::size_t end = pos + needle.size();
    bool right = end == hay.size() || delim(hay[end]) ||
                 (hay[end] == '.' && (end + 1 == hay.size() || std::isspace(static_cast<unsigned char>(hay[end + 1]))));
    if (left && right) return true;
  }
  return false;
}

bool is_ioc_type(const std::string& t) {
  static const std::set<std::string> kIoc = {"IP",       "URL",      "Email",   "Domain",  "Registry",
                                             "FilePath", "FileName", "HashMD5", "HashSHA1", "HashSHA256"};
  return kIoc.count(t) > 0;
}

Verdict c5_ioc_round_trip() {
  Verdict v;
  IocCheck c;

  // Fixtures: gold indicators found in a body must each be one IOC token.
  auto gold = json::parse(test::read_file(test::source_dir() / "fixtures/gold.json"));
  std::map<std::string, std::vector<std::string>> gold_iocs;  // title -> lowercased canonical forms
  for (const auto& r : gold["reports"]) {
    for (const auto& e : r["entities"]) {
      if (is_ioc_type(e[0])) gold_iocs[r["title"]].push_back(to_lower_ascii(e[1].get<std::string>()));
    }
  }
  std::size_t fixture_iocs = 0;
  auto records = fixture_records();
  for (const auto& rec : records) {
    auto pt = nlp::protect_iocs(rec.body_text);
    std::vector<CharSpan> spans;
    std::set<std::string> canon;
    for (const auto& s : pt.span_map) {
      spans.push_back(s.original);
      canon.insert(to_lower_ascii(s.canonical));
    }
    check_text(c, rec.body_text, spans);
    const std::string refanged = to_lower_ascii(nlp::refang(rec.body_text));
    for (const auto& g : gold_iocs[rec.title]) {
      if (!standalone_in(refanged, g)) continue;  // structured-only, or part of a longer indicator
      ++fixture_iocs;
      if (!canon.count(g)) {
        ++c.splits;
        c.note("fixture indicator not kept whole: " + g);
      }
    }
  }
  v.require(records.size() >= 20, fmt::format("only {} fixture records", records.size()));
  v.require(fixture_iocs > 0, "no fixture indicators found in bodies");

  IocGen gen(424242);
  for (int i = 0; i < 1000; ++i) {
    auto [text, spans] = gen.sentence();
    check_text(c, text, spans);
  }
  v.require(c.restore_failures == 0, fmt::format("{} restore mismatches", c.restore_failures));
  v.require(c.surface_failures == 0, fmt::format("{} token surfaces off", c.surface_failures));
  v.require(c.splits == 0, fmt::format("{} split indicators", c.splits));
  if (!c.examples.empty() && !v.pass) v.detail += " e.g. " + fmt::format("{}", fmt::join(c.examples, " | "));
  if (v.pass) {
    v.detail = fmt::format("{} texts ({} fixture bodies), {} indicators, 0 splits", c.strings, records.size(),
                           c.iocs + fixture_iocs);
  }
  return v;
}

// ---------------------------------------------------------------- 6

Verdict c6_idempotence() {
  Verdict v;
  test::TempDir dir;
  auto cfg = fixture_config(dir / "store", 4);
  auto store = kgraph::GraphStore::open(cfg.store_dir, cli::store_options(cfg));
  cli::run_ingest(cfg, *store);
  auto second = cli::run_ingest(cfg, *store);
  v.require(second.stats.reports_merged > 0, "second ingest processed nothing");
  v.require(second.stats.nodes_created == 0, fmt::format("{} nodes created", second.stats.nodes_created));
  v.require(second.stats.edges_added == 0, fmt::format("{} edges added", second.stats.edges_added));

  auto table = cli::load_alias_table(cfg, store->graph());
  auto first_fuse = store->fuse(table);
  const OntologyGraph fused = store->graph();
  auto second_fuse = store->fuse(cli::load_alias_table(cfg, store->graph()));
  v.require(first_fuse.groups_applied() > 0, "first fusion applied nothing");
  v.require(second_fuse.groups_applied() == 0, fmt::format("{} groups re-applied", second_fuse.groups_applied()));
  v.require(store->graph() == fused, "second fusion changed the graph");

  auto g = test::random_graph(1000, 77);
  test::TempDir pdir;
  kgraph::persist_graph(g, pdir.path());
  v.require(kgraph::load_graph(pdir.path()) == g, "load(persist(g)) != g");
  store.reset();
  v.require(kgraph::load_graph(cfg.store_dir) == fused, "reopened store differs");
  if (v.pass) {
    v.detail = fmt::format("re-ingest of {} reports: 0 created; fusion applied {} then 0 groups; 1000-node round trip",
                           second.stats.reports_merged, first_fuse.groups_applied());
  }
  return v;
}

// ---------------------------------------------------------------- 7

Verdict c7_worker_independence() {
  Verdict v;
  std::vector<std::set<std::pair<std::string, std::string>>> nodes;
  std::vector<std::set<std::tuple<std::string, std::string, std::string>>> edges;
  for (int workers : {1, 4}) {
    test::TempDir dir;
    auto cfg = fixture_config(dir / "store", workers);
    auto store = kgraph::GraphStore::open(cfg.store_dir, cli::store_options(cfg));
    cli::run_ingest(cfg, *store);
    std::set<std::pair<std::string, std::string>> ns;
    for (const auto& [id, n] : store->graph().nodes()) {
      ns.insert({std::string(to_string(n.etype)), normalize_description(n.description, n.etype)});
    }
    std::set<std::tuple<std::string, std::string, std::string>> es;
    for (const auto& [k, a] : store->graph().edges()) es.insert({k.src, k.dst, k.verb});
    nodes.push_back(std::move(ns));
    edges.push_back(std::move(es));
  }
  v.require(nodes[0] == nodes[1], "node sets differ");
  v.require(edges[0] == edges[1], "edge sets differ");
  v.require(!nodes[0].empty(), "empty graph");
  if (v.pass) v.detail = fmt::format("{} nodes, {} distinct edges in both", nodes[0].size(), edges[0].size());
  return v;
}

// ---------------------------------------------------------------- 8

// Copies the fixture corpus until `reports` report keys exist. Copies differ
// by an HTML comment so each passes the duplicate check.
std::size_t replicate_corpus(const fs::path& src_root, const fs::path& dst_root, std::size_t reports,
                             std::vector<std::string> source_dirs) {
  struct Group {
    std::string source;
    std::vector<fs::path> files;
  };
  std::map<std::pair<std::string, std::string>, Group> groups;
  for (const auto& s : source_dirs) {
    for (const auto& e : fs::directory_iterator(src_root / s)) {
      if (!e.is_regular_file()) continue;
      auto key = ingest::report_key_from_path(e.path().filename().string()).key;
      groups[{s, key}].source = s;
      groups[{s, key}].files.push_back(e.path());
    }
  }
  std::size_t made = 0;
  for (std::size_t copy = 0; made < reports; ++copy) {
    for (const auto& [key, g] : groups) {
      if (made == reports) break;
      for (const auto& f : g.files) {
        std::string bytes = test::read_file(f);
        if (f.extension() == ".html") bytes += fmt::format("\n<!-- copy {} -->\n", copy);
        test::write_file(dst_root / g.source / fmt::format("c{:04d}-{}", copy, f.filename().string()), bytes);
      }
      ++made;
    }
  }
  return made;
}

Verdict c8_throughput() {
  Verdict v;
  test::TempDir dir;
  auto cfg = fixture_config(dir / "store", 4);
  std::vector<std::string> names;
  for (auto& s : cfg.pipeline.sources) names.push_back(fs::path(s.entry_locators.at(0)).filename().string());
  const fs::path corpus_root = fs::path(cfg.pipeline.sources.at(0).entry_locators.at(0)).parent_path();
  std::size_t made = replicate_corpus(corpus_root, dir / "corpus", 1000, names);
  for (std::size_t i = 0; i < cfg.pipeline.sources.size(); ++i) {
    cfg.pipeline.sources[i].entry_locators = {(dir / "corpus" / names[i]).string()};
  }
  auto store = kgraph::GraphStore::open(cfg.store_dir, cli::store_options(cfg));
  auto outcome = cli::run_ingest(cfg, *store);
  query::QueryEngine engine(store->view(), store->runs());
  auto stats = engine.stats();
  double rpm = stats["reports_per_minute"].get<double>();
  v.require(made == 1000, fmt::format("only {} copies", made));
  v.require(outcome.stats.reports_ported == 1000, fmt::format("{} reports ported", outcome.stats.reports_ported));
  v.require(rpm >= 350.0, fmt::format("{:.1f} reports/min", rpm));
  v.detail = fmt::format("{} reports ported, {} merged in {:.2f}s; stats reports_per_minute {:.1f}{}",
                         outcome.stats.reports_ported, outcome.stats.reports_merged, outcome.stats.wall_seconds, rpm,
                         v.detail.empty() ? "" : "; " + v.detail);
  return v;
}

// ---------------------------------------------------------------- 9

Verdict c9_ner() {
  Verdict v;
  test::TempDir dir;
  auto cfg = fixture_config(dir / "store", 1);
  auto res = cli::load_extractor_resources(cfg);
  v.require(res->model != nullptr, "no frozen model");
  if (!v.pass) return v;
  auto gold = nlp::load_ner_gold(cfg.train.gold);
  auto model = cli::evaluate_extractor(gold, *res, true);
  auto regex = cli::evaluate_extractor(gold, *res, false);
  auto baseline = json::parse(test::read_file(cfg.train.baseline));
  double f1 = model.micro().f1();
  double want = baseline.at("micro_f1").get<double>();
  v.require(f1 + 1e-12 >= want, fmt::format("micro F1 {:.4f} < baseline {:.4f}", f1, want));
  std::vector<std::string> parts{fmt::format("micro F1 {:.4f} (baseline {:.4f})", f1, want)};
  for (auto t : {EntityType::ThreatActor, EntityType::Technique, EntityType::Tool}) {
    double m = model.per_type[t].f1();
    double r = regex.per_type[t].f1();
    v.require(m > r, fmt::format("{} model {:.4f} <= regex {:.4f}", to_string(t), m, r));
    parts.push_back(fmt::format("{} {:.3f} vs regex {:.3f}", to_string(t), m, r));
  }
  if (v.pass) v.detail = fmt::format("{}", fmt::join(parts, "; "));
  return v;
}

Verdict guarded(const std::function<Verdict()>& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  int failures = 0;
  auto report = [&](int n, const char* name, const Verdict& v) {
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << n << "] " << name << ": " << v.detail << std::endl;
    failures += v.pass ? 0 : 1;
  };

  IngestedStore ingested;
  report(1, "fixture ingest matches gold counts", guarded([&] { return c1_fixture_counts(ingested); }));

  std::unique_ptr<query::ApiServer> server;
  int port = -1;
  if (ingested.store) {
    try {
      server = std::make_unique<query::ApiServer>(
          std::make_shared<query::QueryEngine>(ingested.store->view(), ingested.store->runs()));
      port = server->start("127.0.0.1", 0);
    } catch (const std::exception& e) {
      std::cerr << "server: " << e.what() << "\n";
    }
  }
  if (port > 0) {
    httplib::Client cli("127.0.0.1", port);
    report(2, "search and query agree on wannacry", guarded([&] { return c2_search_equals_query(cli); }));
    report(3, "cozyduke neighborhood", guarded([&] { return c3_cozyduke_neighbors(cli); }));
    server->stop();
  } else {
    report(2, "search and query agree on wannacry", {false, "API server unavailable"});
    report(3, "cozyduke neighborhood", {false, "API server unavailable"});
  }

  report(4, "CRF oracle suite", guarded(c4_crf_oracle));
  report(5, "IOC round trip", guarded(c5_ioc_round_trip));
  report(6, "idempotence", guarded(c6_idempotence));
  report(7, "worker-count independence", guarded(c7_worker_independence));
  report(8, "throughput", guarded(c8_throughput));
  report(9, "NER against baseline and regex-only", guarded(c9_ner));

  std::cout << (failures == 0 ? "all criteria passed" : fmt::format("{} criteria failed", failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
