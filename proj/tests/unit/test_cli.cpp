#include <doctest.h>

#include <sstream>

#include "skg/cli/app.hpp"
#include "support.hpp"

using namespace skg;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

class CliHarness {
 public:
  CliHarness()
      : base_{"--config", (test::source_dir() / "fixtures/config.toml").string(), "--log-level", "error",
              "--set", "store.path=" + (dir_ / "store").string(), "--set",
              "ledger.path=" + (dir_ / "ledger.jsonl").string()} {}

  Run run(std::vector<std::string> args, bool with_base = true) const {
    std::vector<std::string> full = with_base ? base_ : std::vector<std::string>{};
    full.insert(full.end(), args.begin(), args.end());
    std::ostringstream out, err;
    int code = cli::run_cli(full, out, err);
    return {code, out.str(), err.str()};
  }
  const test::TempDir& dir() const { return dir_; }

 private:
  test::TempDir dir_;
  std::vector<std::string> base_;
};

json gold_counts() { return json::parse(test::read_file(test::source_dir() / "fixtures/gold_counts.json")); }

}  // namespace

TEST_CASE("cli ingest, stats and export") {
  CliHarness h;
  auto first = h.run({"ingest", "--json"});
  REQUIRE(first.code == 0);
  auto stats = json::parse(first.out);
  auto gold = gold_counts();
  CHECK(stats["reports_merged"] == gold["reports"]);
  CHECK(stats["nodes_created"] == gold["nodes"]);
  CHECK(stats["filtered"] == gold["filtered"]);
  CHECK(stats["sources"].size() == 3);

  auto second = h.run({"ingest", "--json"});
  REQUIRE(second.code == 0);
  auto again = json::parse(second.out);
  CHECK(again["nodes_created"] == 0);
  CHECK(again["edges_added"] == 0);
  CHECK(again["items_fetched"] == 0);

  auto s = h.run({"stats"});
  REQUIRE(s.code == 0);
  auto sj = json::parse(s.out);
  CHECK(sj["nodes"] == gold["nodes"]);
  CHECK(sj["edges"] == gold["edges"]);
  CHECK(sj["runs"] == 2);

  auto out_file = h.dir() / "graph.ndjson";
  auto e = h.run({"export", "-o", out_file.string()});
  REQUIRE(e.code == 0);
  auto text = test::read_file(out_file);
  std::size_t lines = std::count(text.begin(), text.end(), '\n');
  CHECK(lines == gold["nodes"].get<std::size_t>() + gold["edges"].get<std::size_t>());
}

TEST_CASE("cli fusion is idempotent") {
  CliHarness h;
  REQUIRE(h.run({"ingest"}).code == 0);
  auto first = h.run({"fuse", "--json"});
  REQUIRE(first.code == 0);
  auto after_first = json::parse(h.run({"stats"}).out);
  auto second = h.run({"fuse", "--json"});
  REQUIRE(second.code == 0);
  for (const auto& g : json::parse(second.out)["groups"]) CHECK(g["applied"] == false);
  CHECK(json::parse(h.run({"stats"}).out) == after_first);
}

TEST_CASE("cli eval-ner meets the recorded baseline") {
  CliHarness h;
  auto r = h.run({"eval-ner", "--check"});
  CHECK(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j.contains("model"));
  CHECK(j.contains("regex_only"));
}

TEST_CASE("cli exit codes") {
  CliHarness h;
  CHECK(h.run({"--help"}, false).code == 0);
  CHECK(h.run({"frobnicate"}, false).code == cli::kValidation);
  CHECK(h.run({"--config", "/nonexistent.toml", "stats"}, false).code == cli::kValidation);
  CHECK(h.run({"--set", "novalue", "stats"}).code == cli::kValidation);
  CHECK(h.run({"--set", "pipeline.workers=0", "stats"}).code == cli::kValidation);

  REQUIRE(h.run({"ingest"}).code == 0);
  auto log = h.dir() / "store/log.skg";
  auto bytes = test::read_file(log);
  REQUIRE(bytes.size() > 40);
  bytes[30] ^= 0x55;
  test::write_file(log, bytes);
  auto r = h.run({"stats"});
  CHECK(r.code == cli::kRuntime);
  CHECK(r.err.find("CorruptLog") != std::string::npos);
}
