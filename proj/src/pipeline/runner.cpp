#include "skg/pipeline/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "skg/core/error.hpp"
#include "skg/ingest/scheduler.hpp"
#include "skg/parsers/parser.hpp"
#include "skg/pipeline/queue.hpp"

namespace skg::pipeline {

using nlohmann::json;
using SteadyClock = std::chrono::steady_clock;

json RunStats::to_json() const {
  json stage_list = json::array();
  for (const auto& s : stages) {
    stage_list.push_back({{"name", s.name},
                          {"kind", to_string(s.kind)},
                          {"workers", s.workers},
                          {"in", s.in},
                          {"out", s.out},
                          {"filtered", s.filtered},
                          {"errored", s.errored},
                          {"busy_seconds", s.busy_seconds}});
  }
  json error_list = json::array();
  for (const auto& e : errors) {
    error_list.push_back({{"item", e.item}, {"stage", to_string(e.stage)}, {"code", e.code}, {"message", e.message}});
  }
  return {{"started_at", to_iso8601(started_at)},
          {"wall_seconds", wall_seconds},
          {"items_fetched", items_fetched},
          {"reports_ported", reports_ported},
          {"reports_merged", reports_merged},
          {"reports_per_minute", reports_per_minute},
          {"filtered", filtered},
          {"errors", error_list},
          {"nodes_created", nodes_created},
          {"nodes_unified", nodes_unified},
          {"edges_added", edges_added},
          {"queue_capacity", queue_capacity},
          {"queue_high_water", queue_high_water},
          {"stages", stage_list}};
}

namespace {

struct Envelope {
  std::size_t seq = 0;
  std::string id;
  std::optional<ReportDoc> doc;
  std::optional<CtiRecord> rec;
  bool dropped = false;
};

using Queue = BoundedQueue<Envelope>;

double seconds_since(SteadyClock::time_point t0) {
  return std::chrono::duration<double>(SteadyClock::now() - t0).count();
}

ItemError to_item_error(const std::string& id, StageKind kind, const std::exception& ex) {
  if (const auto* e = dynamic_cast<const Error*>(&ex)) return {id, kind, std::string(to_string(e->code())), e->what()};
  return {id, kind, "InternalError", ex.what()};
}

/// Shared bookkeeping for all worker threads.
class Recorder {
 public:
  explicit Recorder(RunStats& stats) : stats_(stats) {}

  void stage(std::size_t idx, std::size_t in, std::size_t out, std::size_t filtered, std::size_t errored,
             double busy) {
    std::lock_guard lock(mu_);
    auto& s = stats_.stages[idx];
    s.in += in;
    s.out += out;
    s.filtered += filtered;
    s.errored += errored;
    s.busy_seconds += busy;
  }
  void filter(const std::string& rule) {
    std::lock_guard lock(mu_);
    ++stats_.filtered[rule];
  }
  void error(ItemError e) {
    spdlog::warn("{} {} failed on {}: {}", to_string(e.stage), e.code, e.item, e.message);
    std::lock_guard lock(mu_);
    stats_.errors.push_back(std::move(e));
  }

 private:
  RunStats& stats_;
  std::mutex mu_;
};

/// Runs `workers` threads that apply `fn` to every live envelope from `in`
/// and forward everything to `out`. The last worker to finish closes `out`.
std::vector<std::thread> start_pool(int workers, Queue& in, Queue& out, std::function<void(Envelope&)> fn) {
  auto remaining = std::make_shared<std::atomic<int>>(workers);
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&in, &out, fn, remaining] {
      while (auto env = in.pop()) {
        if (!env->dropped) fn(*env);
        out.push(std::move(*env));
        in.task_done();
      }
      if (remaining->fetch_sub(1) == 1) out.close();
    });
  }
  return threads;
}

}  // namespace

RunStats run_pipeline(const PipelineConfig& config, const Registry& registry, BuildContext& ctx,
                      std::vector<ingest::FetchedItem> items) {
  validate(config);
  RunStats stats;
  stats.started_at = now_utc();
  stats.items_fetched = items.size();
  stats.queue_capacity = config.queue_capacity;
  const auto t0 = SteadyClock::now();

  // Build every stage up front so configuration errors surface before work starts.
  std::vector<std::unique_ptr<Component>> owned;
  Porter* porter = nullptr;
  Parser* parser = nullptr;
  std::vector<std::pair<std::size_t, Checker*>> seq_checkers;
  std::vector<std::pair<std::size_t, Checker*>> par_checkers;
  std::vector<std::pair<std::size_t, Extractor*>> extractors;
  std::vector<std::pair<std::size_t, Connector*>> connectors;
  std::size_t parser_idx = 0;
  for (std::size_t i = 0; i < config.stages.size(); ++i) {
    const auto& d = config.stages[i];
    owned.push_back(registry.build(d, ctx));
    Component* c = owned.back().get();
    int workers = (d.kind == StageKind::Porter || d.kind == StageKind::Connector) ? 1 : config.workers_for(d.kind);
    stats.stages.push_back({d.name, d.kind, workers, 0, 0, 0, 0, 0.0});
    switch (d.kind) {
      case StageKind::Porter: porter = static_cast<Porter*>(c); break;
      case StageKind::Checker: {
        auto* ch = static_cast<Checker*>(c);
        (ch->sequential() ? seq_checkers : par_checkers).emplace_back(i, ch);
        break;
      }
      case StageKind::Parser:
        parser = static_cast<Parser*>(c);
        parser_idx = i;
        break;
      case StageKind::Extractor: extractors.emplace_back(i, static_cast<Extractor*>(c)); break;
      case StageKind::Connector: connectors.emplace_back(i, static_cast<Connector*>(c)); break;
    }
  }

  Recorder rec(stats);

  // Porter plus sequential checkers, in porter order on this thread.
  const auto tp = SteadyClock::now();
  std::vector<ItemError> port_errors;
  std::vector<ReportDoc> docs = porter->port(std::move(items), port_errors);
  for (auto& e : port_errors) rec.error(std::move(e));
  rec.stage(0, stats.items_fetched, docs.size(), 0, port_errors.size(), seconds_since(tp));
  stats.reports_ported = docs.size();

  std::vector<Envelope> envelopes;
  envelopes.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    Envelope env;
    env.seq = i;
    env.id = docs[i].report_id;
    env.doc = std::move(docs[i]);
    for (auto [idx, checker] : seq_checkers) {
      if (env.dropped) break;
      const auto t = SteadyClock::now();
      std::size_t filtered = 0;
      std::size_t errored = 0;
      try {
        if (auto rule = checker->check(*env.doc)) {
          rec.filter(*rule);
          env.dropped = true;
          filtered = 1;
        }
      } catch (const std::exception& ex) {
        rec.error(to_item_error(env.id, StageKind::Checker, ex));
        env.dropped = true;
        errored = 1;
      }
      rec.stage(idx, 1, 1 - filtered - errored, filtered, errored, seconds_since(t));
    }
    envelopes.push_back(std::move(env));
  }

  const std::size_t cap = config.queue_capacity;
  Queue q_check(cap), q_parse(cap), q_extract(cap), q_connect(cap);
  std::vector<std::thread> threads;

  // Documents whose checks all passed carry on; others travel as dropped
  // markers so the connector can keep porter order.
  auto check_fn = [&](Envelope& env) {
    for (auto [idx, checker] : par_checkers) {
      const auto t = SteadyClock::now();
      try {
        if (auto rule = checker->check(*env.doc)) {
          rec.filter(*rule);
          env.dropped = true;
          rec.stage(idx, 1, 0, 1, 0, seconds_since(t));
          return;
        }
        rec.stage(idx, 1, 1, 0, 0, seconds_since(t));
      } catch (const std::exception& ex) {
        rec.error(to_item_error(env.id, StageKind::Checker, ex));
        env.dropped = true;
        rec.stage(idx, 1, 0, 0, 1, seconds_since(t));
        return;
      }
    }
  };
  auto parse_fn = [&](Envelope& env) {
    const auto t = SteadyClock::now();
    try {
      env.rec = parser ? parser->parse(*env.doc) : parsers::parse(*env.doc, parsers::generic_template());
      env.doc.reset();
      if (parser) rec.stage(parser_idx, 1, 1, 0, 0, seconds_since(t));
    } catch (const std::exception& ex) {
      rec.error(to_item_error(env.id, StageKind::Parser, ex));
      env.dropped = true;
      if (parser) rec.stage(parser_idx, 1, 0, 0, 1, seconds_since(t));
    }
  };
  auto extract_fn = [&](Envelope& env) {
    for (auto [idx, extractor] : extractors) {
      const auto t = SteadyClock::now();
      try {
        extractor->extract(*env.rec);
        rec.stage(idx, 1, 1, 0, 0, seconds_since(t));
      } catch (const std::exception& ex) {
        rec.error(to_item_error(env.id, StageKind::Extractor, ex));
        env.dropped = true;
        rec.stage(idx, 1, 0, 0, 1, seconds_since(t));
        return;
      }
    }
  };

  auto c1 = start_pool(config.workers_for(StageKind::Checker), q_check, q_parse, check_fn);
  auto c2 = start_pool(config.workers_for(StageKind::Parser), q_parse, q_extract, parse_fn);
  auto c3 = start_pool(config.workers_for(StageKind::Extractor), q_extract, q_connect, extract_fn);
  for (auto* group : {&c1, &c2, &c3}) {
    for (auto& t : *group) threads.push_back(std::move(t));
  }

  // Single writer: reorder to porter sequence, then apply every connector.
  std::thread writer([&] {
    std::map<std::size_t, Envelope> pending;
    std::size_t next = 0;
    auto apply = [&](Envelope& env) {
      if (env.dropped) return;
      bool ok = true;
      for (auto [idx, connector] : connectors) {
        const auto t = SteadyClock::now();
        try {
          auto delta = connector->connect(*env.rec);
          stats.nodes_created += delta.nodes_created;
          stats.nodes_unified += delta.nodes_unified;
          stats.edges_added += delta.edges_added;
          rec.stage(idx, 1, 1, 0, 0, seconds_since(t));
        } catch (const std::exception& ex) {
          rec.error(to_item_error(env.id, StageKind::Connector, ex));
          rec.stage(idx, 1, 0, 0, 1, seconds_since(t));
          ok = false;
          break;
        }
      }
      if (ok) ++stats.reports_merged;
    };
    while (auto env = q_connect.pop()) {
      pending.emplace(env->seq, std::move(*env));
      q_connect.task_done();
      for (auto it = pending.find(next); it != pending.end(); it = pending.find(next)) {
        apply(it->second);
        pending.erase(it);
        ++next;
      }
    }
    for (auto& [seq, e] : pending) apply(e);
  });

  for (auto& env : envelopes) q_check.push(std::move(env));
  q_check.close();
  for (auto& t : threads) t.join();
  writer.join();

  stats.queue_high_water = {{"check", q_check.high_water()},
                            {"parse", q_parse.high_water()},
                            {"extract", q_extract.high_water()},
                            {"connect", q_connect.high_water()}};
  stats.wall_seconds = seconds_since(t0);
  auto window = std::max<ingest::Duration>(std::chrono::seconds(10),
                                           std::chrono::duration_cast<ingest::Duration>(SteadyClock::now() - t0));
  stats.reports_per_minute = ingest::throughput_report(stats.reports_ported, window);
  std::size_t filtered = 0;
  for (const auto& [rule, n] : stats.filtered) filtered += n;
  spdlog::info("pipeline: {} items, {} reports, {} merged, {} filtered, {} errors in {:.2f}s", stats.items_fetched,
               stats.reports_ported, stats.reports_merged, filtered, stats.errors.size(), stats.wall_seconds);
  return stats;
}

}  // namespace skg::pipeline
