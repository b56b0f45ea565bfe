#include <doctest.h>

#include "graph_gen.hpp"
#include "skg/core/error.hpp"
#include "skg/kgraph/store.hpp"
#include "support.hpp"

using namespace skg;
using namespace skg::kgraph;

namespace {

RefactorResult small_result(const std::string& report, const std::string& actor, const std::string& tool) {
  RefactorResult r;
  r.report_id = report;
  r.nodes.push_back({EntityType::ReportAttack, report + " campaign", {}});
  r.nodes.push_back({EntityType::ThreatActor, actor, {}});
  r.nodes.push_back({EntityType::Tool, tool, {}});
  r.edges.push_back({0, 1, kContains, {}});
  r.edges.push_back({0, 2, kContains, {}});
  r.edges.push_back({1, 2, "USE", {{"evidence", actor + " uses " + tool}}});
  return r;
}

GraphStore::Options manual() {
  GraphStore::Options o;
  o.snapshot_every = 0;
  return o;
}

std::uint32_t le32(const std::string& s, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + i])) << (8 * i);
  return v;
}

}  // namespace

TEST_CASE("persist then load is the identity on random graphs") {
  for (std::uint64_t seed : {1, 2, 3}) {
    test::TempDir dir;
    auto g = test::random_graph(300, seed);
    persist_graph(g, dir.path());
    LoadInfo info;
    CHECK(load_graph(dir.path(), &info) == g);
    CHECK(info.generation == 1);
    CHECK(info.records_replayed == 0);
  }
}

TEST_CASE("missing directory loads as an empty graph") {
  test::TempDir dir;
  CHECK(load_graph(dir / "nothing").node_count() == 0);
  auto s = GraphStore::open(dir / "fresh");
  CHECK(s->graph().node_count() == 0);
  CHECK(s->generation() == 0);
}

TEST_CASE("store reopen replays the log") {
  test::TempDir dir;
  OntologyGraph expected;
  {
    auto s = GraphStore::open(dir.path(), manual());
    s->merge(small_result("r1", "apt29", "mimikatz"));
    s->merge(small_result("r2", "apt28", "mimikatz"));
    expected = s->graph();
    CHECK(s->log_records() > 0);
  }
  auto s = GraphStore::open(dir.path(), manual());
  CHECK(s->graph() == expected);
  CHECK(s->load_info().records_replayed > 0);
  CHECK(load_graph(dir.path()) == expected);
}

TEST_CASE("repeated merges append nothing") {
  test::TempDir dir;
  auto s = GraphStore::open(dir.path(), manual());
  s->merge(small_result("r1", "apt29", "mimikatz"));
  auto records = s->log_records();
  auto delta = s->merge(small_result("r1", "apt29", "mimikatz"));
  CHECK(delta.nodes_created == 0);
  CHECK(delta.edges_added == 0);
  CHECK(s->log_records() == records);
}

TEST_CASE("snapshots advance the generation and empty the log") {
  test::TempDir dir;
  auto s = GraphStore::open(dir.path(), manual());
  s->merge(small_result("r1", "apt29", "mimikatz"));
  s->snapshot();
  CHECK(s->generation() == 1);
  CHECK(s->log_records() == 0);
  CHECK(std::filesystem::file_size(dir / "log.skg") == 18);
  s->merge(small_result("r2", "turla", "mosquito"));
  auto expected = s->graph();
  s.reset();
  LoadInfo info;
  CHECK(load_graph(dir.path(), &info) == expected);
  CHECK(info.generation == 1);

  GraphStore::Options auto_snap;
  auto_snap.snapshot_every = 2;
  auto t = GraphStore::open(dir.path(), auto_snap);
  t->merge(small_result("r3", "fin7", "carbanak"));
  CHECK(t->generation() == 2);
}

TEST_CASE("partial tail record is dropped") {
  test::TempDir dir;
  OntologyGraph after_first;
  {
    auto s = GraphStore::open(dir.path(), manual());
    s->merge(small_result("r1", "apt29", "mimikatz"));
    after_first = s->graph();
    s->merge(small_result("r2", "apt28", "xagent"));
  }
  auto log = test::read_file(dir / "log.skg");
  // Walk records to find where the second merge starts.
  std::size_t pos = 18;
  std::vector<std::size_t> starts;
  while (pos < log.size()) {
    starts.push_back(pos);
    pos += 8 + le32(log, pos);
  }
  REQUIRE(pos == log.size());
  auto first_merge_records = 3 + 3;  // nodes + edges
  REQUIRE(starts.size() > static_cast<std::size_t>(first_merge_records));
  std::size_t cut = starts[first_merge_records] + 5;
  test::write_file(dir / "log.skg", log.substr(0, cut));

  LoadInfo info;
  auto g = load_graph(dir.path(), &info);
  CHECK(info.truncated_bytes == 5);
  CHECK(info.records_replayed == static_cast<std::size_t>(first_merge_records));
  CHECK(g == after_first);

  auto s = GraphStore::open(dir.path(), manual());
  CHECK(std::filesystem::file_size(dir / "log.skg") == starts[first_merge_records]);
  s->merge(small_result("r2", "apt28", "xagent"));
  s.reset();
  CHECK(load_graph(dir.path()).node_count() == 6);
}

TEST_CASE("checksum mismatch reports the record offset") {
  test::TempDir dir;
  {
    auto s = GraphStore::open(dir.path(), manual());
    s->merge(small_result("r1", "apt29", "mimikatz"));
  }
  auto log = test::read_file(dir / "log.skg");
  std::size_t second = 18 + 8 + le32(log, 18);
  log[second + 8 + 2] ^= 0x40;
  test::write_file(dir / "log.skg", log);
  try {
    load_graph(dir.path());
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CorruptLog);
    REQUIRE(e.offset());
    CHECK(*e.offset() == second);
  }
  CHECK_THROWS_AS(GraphStore::open(dir.path()), Error);
}

TEST_CASE("foreign format version is refused") {
  test::TempDir dir;
  persist_graph(test::random_graph(5, 1), dir.path());
  auto snap = test::read_file(dir / "snapshot.skg");
  snap[8] = 7;
  test::write_file(dir / "snapshot.skg", snap);
  try {
    load_graph(dir.path());
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::VersionMismatch);
    CHECK(e.offset() == std::optional<std::size_t>{8});
  }
}

TEST_CASE("bad magic is corrupt") {
  test::TempDir dir;
  persist_graph(test::random_graph(5, 1), dir.path());
  auto log = test::read_file(dir / "log.skg");
  log[0] = 'X';
  test::write_file(dir / "log.skg", log);
  try {
    load_graph(dir.path());
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CorruptLog);
  }
}

TEST_CASE("fusion records replay") {
  test::TempDir dir;
  OntologyGraph expected;
  {
    auto s = GraphStore::open(dir.path(), manual());
    s->merge(small_result("r1", "apt29", "mimikatz"));
    s->merge(small_result("r2", "cozy bear", "mimikatz"));
    AliasTable t;
    t.add({EntityType::ThreatActor, "APT29", {"Cozy Bear"}, "curated:t"});
    auto rep = s->fuse(t);
    CHECK(rep.groups_applied() == 1);
    expected = s->graph();
  }
  CHECK(load_graph(dir.path()) == expected);
  CHECK(expected.find(EntityType::ThreatActor, "cozy bear") == nullptr);
}

TEST_CASE("run history accumulates in meta.json") {
  test::TempDir dir;
  auto s = GraphStore::open(dir.path());
  CHECK(s->runs().empty());
  s->append_run({{"reports", 3}});
  s->append_run({{"reports", 4}});
  auto runs = s->runs();
  REQUIRE(runs.size() == 2);
  CHECK(runs[1]["reports"] == 4);
  auto again = GraphStore::open(dir.path());
  CHECK(again->runs().size() == 2);
}
