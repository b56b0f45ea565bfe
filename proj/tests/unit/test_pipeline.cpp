#include <doctest.h>

#include <atomic>
#include <thread>

#include "skg/cli/app.hpp"
#include "skg/core/error.hpp"
#include "skg/core/text.hpp"
#include "skg/pipeline/components.hpp"
#include "skg/pipeline/queue.hpp"
#include "skg/pipeline/runner.hpp"
#include "skg/pipeline/toml.hpp"
#include "support.hpp"

using namespace skg;
using namespace skg::pipeline;
using nlohmann::json;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no throw");
  return ErrorCode::IoError;
}

ingest::FetchedItem page(const std::string& key, int idx, const std::string& body) {
  ingest::FetchedItem it;
  it.source_id = "s";
  it.origin_locator = "local://s/" + key + ".p" + std::to_string(idx);
  it.report_key = key;
  it.page_index = idx;
  it.content_type = "text/plain";
  it.bytes = body;
  return it;
}

std::string filler(const std::string& seed) {
  std::string s;
  for (int i = 0; i < 40; ++i) s += seed + " malware analysis report. ";
  return s;
}

class RecordingConnector final : public Connector {
 public:
  explicit RecordingConnector(std::vector<std::string>* seen) : seen_(seen) {}
  kgraph::MergeDelta connect(const CtiRecord& rec) override {
    seen_->push_back(rec.report_id);
    return {};
  }

 private:
  std::vector<std::string>* seen_;
};

// Sleeps a varying amount so workers finish out of order; fails on "boom".
class JitterExtractor final : public Extractor {
 public:
  void extract(CtiRecord& rec) override {
    auto n = rec.body_text.size() % 7;
    std::this_thread::sleep_for(std::chrono::microseconds(200 * n));
    if (rec.body_text.find("boom") != std::string::npos) throw Error(ErrorCode::ValidationError, "boom");
  }
};

PipelineConfig test_pipeline(int workers) {
  PipelineConfig c;
  c.default_workers = workers;
  c.queue_capacity = 4;
  c.stages = {{StageKind::Porter, "grouping", json::object()},
              {StageKind::Checker, "duplicate-content-hash", json::object()},
              {StageKind::Checker, "min-text-length", {{"min_chars", 100}}},
              {StageKind::Extractor, "jitter", json::object()},
              {StageKind::Connector, "recording", json::object()}};
  return c;
}

Registry test_registry(std::vector<std::string>* seen) {
  Registry r;
  register_builtin_components(r);
  r.register_component(StageKind::Extractor, "jitter",
                       [](const StageDescriptor&, BuildContext&) { return std::make_unique<JitterExtractor>(); });
  r.register_component(StageKind::Connector, "recording", [seen](const StageDescriptor&, BuildContext&) {
    return std::make_unique<RecordingConnector>(seen);
  });
  return r;
}

}  // namespace

TEST_CASE("toml subset") {
  auto j = parse_toml(R"(
# comment
title = "x" # trailing
[pipeline]
workers = 4
ratio = 0.5
on = true
"quoted key" = 'lit\eral'
list = [1, 2,
  3,]
inline = { a = 1, b.c = "d" }
[a.b]
k = -7
[[sources]]
id = "one"
[[sources]]
id = "two"
)");
  CHECK(j["title"] == "x");
  CHECK(j["pipeline"]["workers"] == 4);
  CHECK(j["pipeline"]["ratio"] == 0.5);
  CHECK(j["pipeline"]["on"] == true);
  CHECK(j["pipeline"]["quoted key"] == "lit\\eral");
  CHECK(j["pipeline"]["list"] == json::array({1, 2, 3}));
  CHECK(j["pipeline"]["inline"]["b"]["c"] == "d");
  CHECK(j["a"]["b"]["k"] == -7);
  REQUIRE(j["sources"].size() == 2);
  CHECK(j["sources"][1]["id"] == "two");
}

TEST_CASE("toml errors carry line and column") {
  try {
    parse_toml("a = 1\nb = @\n");
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValidationError);
    CHECK(std::string(e.what()).find("2:5") != std::string::npos);
  }
  CHECK(code_of([] { parse_toml("a = 1\na = 2\n"); }) == ErrorCode::ValidationError);
  CHECK(code_of([] { parse_toml("s = \"open\n"); }) == ErrorCode::ValidationError);
  CHECK(parse_toml_value_lenient("plain words") == "plain words");
  CHECK(parse_toml_value_lenient("12") == 12);
}

TEST_CASE("overrides set dotted keys") {
  json root = parse_toml("[store]\npath = \"a\"\n[[sources]]\nid = \"x\"\n");
  apply_override(root, "store.path=/tmp/other");
  apply_override(root, "pipeline.workers=2");
  apply_override(root, "sources.0.id=\"y\"");
  CHECK(root["store"]["path"] == "/tmp/other");
  CHECK(root["pipeline"]["workers"] == 2);
  CHECK(root["sources"][0]["id"] == "y");
  CHECK(code_of([&] { apply_override(root, "noequals"); }) == ErrorCode::ValidationError);
  CHECK(code_of([&] { apply_override(root, "sources.5.id=1"); }) == ErrorCode::ValidationError);
  CHECK(code_of([&] { apply_override(root, "store.path.x=1"); }) == ErrorCode::ValidationError);
}

TEST_CASE("fixture config loads with overrides") {
  test::TempDir dir;
  auto cfg = load_config(test::source_dir() / "fixtures/config.toml",
                         {"store.path=" + (dir / "store").string(), "pipeline.workers=1"});
  CHECK(cfg.store_dir == (dir / "store").string());
  CHECK(cfg.pipeline.default_workers == 1);
  CHECK(cfg.pipeline.sources.size() == 3);
  CHECK(cfg.pipeline.stages.size() == default_stages().size());
  CHECK(std::filesystem::path(cfg.pipeline.sources[0].entry_locators[0]).is_absolute());
  CHECK(code_of([] { load_config("/nonexistent/config.toml"); }) == ErrorCode::ValidationError);
}

TEST_CASE("pipeline shape is validated") {
  PipelineConfig c;
  c.stages = default_stages();
  CHECK_NOTHROW(validate(c));
  auto two_porters = c;
  two_porters.stages.push_back(c.stages.front());
  CHECK(code_of([&] { validate(two_porters); }) == ErrorCode::BuildError);
  auto no_connector = c;
  no_connector.stages.pop_back();
  CHECK(code_of([&] { validate(no_connector); }) == ErrorCode::BuildError);
  auto zero = c;
  zero.queue_capacity = 0;
  CHECK(code_of([&] { validate(zero); }) == ErrorCode::BuildError);
  auto bad_workers = c;
  bad_workers.workers_per_stage[StageKind::Parser] = 0;
  CHECK(code_of([&] { validate(bad_workers); }) == ErrorCode::BuildError);
  c.workers_per_stage[StageKind::Extractor] = 3;
  CHECK(c.workers_for(StageKind::Extractor) == 3);
  CHECK(c.workers_for(StageKind::Checker) == c.default_workers);
}

TEST_CASE("registry errors") {
  Registry r;
  register_builtin_components(r);
  CHECK(r.contains(StageKind::Extractor, "crf"));
  CHECK(code_of([&] {
          r.register_component(StageKind::Checker, "min-text-length",
                               [](const StageDescriptor&, BuildContext&) { return nullptr; });
        }) == ErrorCode::DuplicateName);
  BuildContext ctx;
  CHECK(code_of([&] { r.build({StageKind::Checker, "nope", {}}, ctx); }) == ErrorCode::UnknownComponent);
  CHECK(code_of([&] { r.build({StageKind::Connector, "embedded", {}}, ctx); }) == ErrorCode::BuildError);
  r.register_component(StageKind::Parser, "wrong", [](const StageDescriptor&, BuildContext&) {
    return std::make_unique<JitterExtractor>();
  });
  CHECK(code_of([&] { r.build({StageKind::Parser, "wrong", {}}, ctx); }) == ErrorCode::BuildError);
  r.register_component(StageKind::Parser, "throws", [](const StageDescriptor&, BuildContext&) -> std::unique_ptr<Component> {
    throw std::runtime_error("nope");
  });
  CHECK(code_of([&] { r.build({StageKind::Parser, "throws", {}}, ctx); }) == ErrorCode::BuildError);
}

TEST_CASE("grouping porter orders pages and drops empty ones") {
  Registry r;
  register_builtin_components(r);
  BuildContext ctx;
  auto comp = r.build({StageKind::Porter, "grouping", {}}, ctx);
  auto* porter = dynamic_cast<Porter*>(comp.get());
  REQUIRE(porter);
  std::vector<ItemError> errors;
  auto docs = porter->port({page("b", 2, "b two"), page("a", 1, "a one"), page("b", 1, "b one"), page("c", 1, "")},
                           errors);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].raw_payloads.size() == 2);
  CHECK(docs[0].raw_payloads[0].bytes == "b one");
  CHECK(docs[0].origin_locator == "local://s/b.p1");
  CHECK(docs[0].report_id == make_report_id("s", "local://s/b.p1", docs[0].content_hash));
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].code == "UnreadablePayload");

  std::vector<ItemError> again;
  auto docs2 = porter->port({page("a", 1, "a one")}, again);
  CHECK(docs2[0].content_hash == docs[1].content_hash);
}

TEST_CASE("checkers") {
  Registry r;
  register_builtin_components(r);
  BuildContext ctx;
  auto doc = [](const std::string& body) {
    ReportDoc d;
    d.raw_payloads.push_back({"text/plain", body});
    d.content_hash = sha256_hex(body);
    return d;
  };
  auto len = r.build({StageKind::Checker, "min-text-length", {{"min_chars", 10}}}, ctx);
  auto* c = dynamic_cast<Checker*>(len.get());
  CHECK(c->check(doc("short")) == std::optional<std::string>{"min-text-length"});
  CHECK_FALSE(c->check(doc("long enough text")));

  auto ads = r.build({StageKind::Checker, "ad-keyword-density", json::object()}, ctx);
  auto* a = dynamic_cast<Checker*>(ads.get());
  CHECK(a->check(doc("buy now sale discount coupon free shipping on this deal")) ==
        std::optional<std::string>{"ad-keyword-density"});
  CHECK_FALSE(a->check(doc(filler("trojan"))));

  auto dup = r.build({StageKind::Checker, "duplicate-content-hash", json::object()}, ctx);
  auto* d = dynamic_cast<Checker*>(dup.get());
  CHECK(d->sequential());
  CHECK_FALSE(d->check(doc("one")));
  CHECK(d->check(doc("one")) == std::optional<std::string>{"duplicate-content-hash"});
}

TEST_CASE("bounded queue applies back-pressure") {
  BoundedQueue<int> q(2);
  q.push(1);
  q.push(2);
  std::atomic<bool> pushed{false};
  std::thread producer([&] {
    q.push(3);
    pushed = true;
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  CHECK_FALSE(pushed);
  CHECK(q.pop() == 1);
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  CHECK_FALSE(pushed);  // popped but not yet done
  q.task_done();
  producer.join();
  CHECK(pushed);
  CHECK(q.high_water() == 2);
  q.close();
  CHECK(q.pop() == 2);
  CHECK(q.pop() == 3);
  CHECK_FALSE(q.pop());
}

TEST_CASE("runner keeps porter order and isolates failures") {
  std::vector<ingest::FetchedItem> items;
  for (int i = 0; i < 30; ++i) items.push_back(page("k" + std::to_string(100 + i), 1, filler("doc" + std::to_string(i))));
  items.push_back(page("dup", 1, filler("doc3")));
  items.push_back(page("tiny", 1, "too short"));
  items.push_back(page("bad", 1, filler("boom")));

  std::vector<std::vector<std::string>> orders;
  for (int workers : {1, 4}) {
    std::vector<std::string> seen;
    auto reg = test_registry(&seen);
    BuildContext ctx;
    auto stats = run_pipeline(test_pipeline(workers), reg, ctx, items);
    CHECK(stats.items_fetched == 33);
    CHECK(stats.reports_ported == 33);
    CHECK(stats.reports_merged == 30);
    CHECK(stats.filtered.at("duplicate-content-hash") == 1);
    CHECK(stats.filtered.at("min-text-length") == 1);
    REQUIRE(stats.errors.size() == 1);
    CHECK(stats.errors[0].code == "ValidationError");
    CHECK(stats.errors[0].stage == StageKind::Extractor);
    CHECK(stats.stages[3].errored == 1);
    CHECK(stats.queue_high_water.at("check") <= 4);
    CHECK(stats.to_json()["stages"].size() == 5);
    orders.push_back(seen);
  }
  CHECK(orders[0] == orders[1]);
  REQUIRE(orders[0].size() == 30);
}

TEST_CASE("unknown stage aborts before any work") {
  std::vector<std::string> seen;
  auto reg = test_registry(&seen);
  auto cfg = test_pipeline(2);
  cfg.stages[3].name = "missing";
  BuildContext ctx;
  CHECK(code_of([&] { run_pipeline(cfg, reg, ctx, {page("a", 1, filler("a"))}); }) == ErrorCode::UnknownComponent);
  CHECK(seen.empty());
}

TEST_CASE("fixture ingest is independent of worker count") {
  std::vector<OntologyGraph> graphs;
  for (int workers : {1, 4}) {
    test::TempDir dir;
    auto cfg = load_config(test::source_dir() / "fixtures/config.toml",
                           {"store.path=" + (dir / "store").string(), "ledger.path=",
                            "pipeline.workers=" + std::to_string(workers)});
    auto store = kgraph::GraphStore::open(cfg.store_dir, cli::store_options(cfg));
    auto outcome = cli::run_ingest(cfg, *store);
    CHECK(outcome.stats.reports_merged == 21);
    CHECK(outcome.stats.errors.empty());
    graphs.push_back(store->graph());
  }
  CHECK(graphs[0] == graphs[1]);
}
