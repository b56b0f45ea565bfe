#include "skg/kgraph/store.hpp"

#include <unistd.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "skg/core/encoding.hpp"
#include "skg/core/error.hpp"
#include "skg/core/text.hpp"

namespace skg::kgraph {

namespace fs = std::filesystem;

namespace {

constexpr char kSnapshotMagic[8] = {'S', 'K', 'G', 'S', 'N', 'A', 'P', '\0'};
constexpr char kLogMagic[8] = {'S', 'K', 'G', 'L', 'O', 'G', '\0', '\0'};
constexpr std::size_t kHeaderSize = 8 + 2 + 8;
constexpr std::size_t kRecordPrefix = 8;

const char* kSnapshotFile = "snapshot.skg";
const char* kLogFile = "log.skg";
const char* kMetaFile = "meta.json";

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
std::uint64_t get_le(std::string_view s, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[at + i])) << (8 * i);
  return v;
}

std::string header(const char (&magic)[8], std::uint64_t generation) {
  std::string h(magic, 8);
  put_u16(h, kStoreFormatVersion);
  put_u64(h, generation);
  return h;
}

struct Header {
  std::uint16_t version = 0;
  std::uint64_t generation = 0;
};

// Returns nullopt when the file is too short to hold a header.
std::optional<Header> read_header(std::string_view bytes, const char (&magic)[8], const fs::path& file) {
  if (bytes.size() < kHeaderSize) return std::nullopt;
  if (std::memcmp(bytes.data(), magic, 8) != 0) {
    throw Error(ErrorCode::CorruptLog, "bad magic in " + file.string(), 0);
  }
  Header h;
  h.version = static_cast<std::uint16_t>(get_le(bytes, 8, 2));
  h.generation = get_le(bytes, 10, 8);
  if (h.version != kStoreFormatVersion) {
    throw Error(ErrorCode::VersionMismatch,
                fmt::format("{} has format version {}, expected {}", file.string(), h.version, kStoreFormatVersion),
                8);
  }
  return h;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& p, std::string_view bytes, bool sync) {
  fs::path tmp = p;
  tmp += ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
  bool ok = std::fwrite(bytes.data(), 1, bytes.size(), f) == bytes.size();
  ok = std::fflush(f) == 0 && ok;
  if (sync) ok = ::fsync(fileno(f)) == 0 && ok;
  ok = std::fclose(f) == 0 && ok;
  if (!ok) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  fs::rename(tmp, p);
}

std::string encode_record(RecordKind kind, const nlohmann::json& body) {
  std::string payload(1, static_cast<char>(kind));
  auto cbor = nlohmann::json::to_cbor(body);
  payload.append(reinterpret_cast<const char*>(cbor.data()), cbor.size());
  std::string rec;
  put_u32(rec, static_cast<std::uint32_t>(payload.size()));
  put_u32(rec, crc32(payload));
  rec += payload;
  return rec;
}

nlohmann::json edge_json(const EdgeKey& key, const EdgeAttributes& attrs) {
  return {{"src", key.src},
          {"dst", key.dst},
          {"verb", key.verb},
          {"source_report_id", key.source_report_id},
          {"attributes", attrs}};
}

void apply_record(OntologyGraph& g, RecordKind kind, const nlohmann::json& body) {
  switch (kind) {
    case RecordKind::NodeUpsert: {
      Node n = node_from_json(body);
      g.upsert_node(n.etype, n.description, n.attributes, n.source_report_ids);
      return;
    }
    case RecordKind::EdgeInsert: {
      EdgeKey k{body.at("src").get<std::string>(), body.at("dst").get<std::string>(),
                body.at("verb").get<std::string>(), body.at("source_report_id").get<std::string>()};
      g.insert_edge(k, body.at("attributes").get<EdgeAttributes>());
      return;
    }
    case RecordKind::Fusion:
      fuse_group(g, alias_group_from_json(body));
      return;
  }
  throw Error(ErrorCode::CorruptLog, "unknown record kind " + std::to_string(static_cast<int>(kind)));
}

struct LogScan {
  std::uint64_t valid_size = 0;  // bytes up to the end of the last whole record
  bool has_header = false;
};

LogScan replay_log(OntologyGraph& g, const fs::path& file, std::uint64_t snapshot_generation, LoadInfo& info) {
  LogScan scan;
  if (!fs::exists(file)) return scan;
  std::string bytes = read_file(file);
  auto h = read_header(bytes, kLogMagic, file);
  if (!h) {
    info.truncated_bytes = bytes.size();
    return scan;
  }
  scan.has_header = true;
  if (h->generation < snapshot_generation) {
    info.stale_log_ignored = true;
    scan.has_header = false;
    return scan;
  }
  if (h->generation > snapshot_generation) {
    throw Error(ErrorCode::CorruptLog,
                fmt::format("log generation {} is ahead of snapshot generation {}", h->generation,
                            snapshot_generation),
                10);
  }
  std::size_t pos = kHeaderSize;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < kRecordPrefix) break;
    auto len = static_cast<std::size_t>(get_le(bytes, pos, 4));
    auto crc = static_cast<std::uint32_t>(get_le(bytes, pos + 4, 4));
    if (bytes.size() - pos - kRecordPrefix < len) break;
    std::string_view payload(bytes.data() + pos + kRecordPrefix, len);
    if (len == 0 || crc32(payload) != crc) {
      throw Error(ErrorCode::CorruptLog, fmt::format("checksum mismatch in {} at offset {}", file.string(), pos),
                  pos);
    }
    auto kind = static_cast<RecordKind>(static_cast<unsigned char>(payload[0]));
    nlohmann::json body;
    try {
      body = nlohmann::json::from_cbor(payload.substr(1));
      apply_record(g, kind, body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::CorruptLog, fmt::format("undecodable record at offset {}: {}", pos, e.what()), pos);
    }
    pos += kRecordPrefix + len;
    ++info.records_replayed;
  }
  info.truncated_bytes = bytes.size() - pos;
  scan.valid_size = pos;
  return scan;
}

OntologyGraph load_snapshot(const fs::path& file, std::uint64_t& generation) {
  generation = 0;
  if (!fs::exists(file)) return {};
  std::string bytes = read_file(file);
  auto h = read_header(bytes, kSnapshotMagic, file);
  if (!h) throw Error(ErrorCode::CorruptLog, "snapshot " + file.string() + " is truncated", bytes.size());
  generation = h->generation;
  try {
    return deserialize<OntologyGraph>(std::string_view(bytes).substr(kHeaderSize));
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptLog, "snapshot " + file.string() + " is unreadable: " + e.what(),
                kHeaderSize + e.offset().value_or(0));
  }
}

}  // namespace

OntologyGraph load_graph(const fs::path& dir, LoadInfo* info) {
  LoadInfo local;
  OntologyGraph g;
  if (!dir.empty() && fs::exists(dir)) {
    g = load_snapshot(dir / kSnapshotFile, local.generation);
    replay_log(g, dir / kLogFile, local.generation, local);
  }
  if (info) *info = local;
  return g;
}

void persist_graph(const OntologyGraph& graph, const fs::path& dir) {
  fs::create_directories(dir);
  std::uint64_t gen = 0;
  if (fs::exists(dir / kSnapshotFile)) {
    std::string bytes = read_file(dir / kSnapshotFile);
    if (auto h = read_header(bytes, kSnapshotMagic, dir / kSnapshotFile)) gen = h->generation;
  }
  write_file_atomic(dir / kSnapshotFile, header(kSnapshotMagic, gen + 1) + serialize(graph), true);
  write_file_atomic(dir / kLogFile, header(kLogMagic, gen + 1), true);
}

GraphStore::GraphStore(fs::path dir, Options opts) : dir_(std::move(dir)), opts_(opts) {}

GraphStore::~GraphStore() {
  if (log_) std::fclose(log_);
}

std::unique_ptr<GraphStore> GraphStore::open(const fs::path& dir, Options opts) {
  std::unique_ptr<GraphStore> s(new GraphStore(dir, opts));
  fs::create_directories(dir);
  s->graph_ = load_snapshot(dir / kSnapshotFile, s->generation_);
  s->load_info_.generation = s->generation_;
  auto scan = replay_log(s->graph_, dir / kLogFile, s->generation_, s->load_info_);
  s->log_records_ = s->load_info_.records_replayed;
  if (scan.has_header) {
    s->open_log_for_append(scan.valid_size);
  } else {
    write_file_atomic(dir / kLogFile, header(kLogMagic, s->generation_), opts.fsync);
    s->open_log_for_append(kHeaderSize);
  }
  return s;
}

void GraphStore::open_log_for_append(std::uint64_t valid_size) {
  if (log_) std::fclose(log_);
  fs::path p = dir_ / kLogFile;
  if (fs::file_size(p) != valid_size) fs::resize_file(p, valid_size);
  log_ = std::fopen(p.c_str(), "ab");
  if (!log_) throw Error(ErrorCode::IoError, "cannot append to " + p.string());
}

void GraphStore::append(RecordKind kind, const nlohmann::json& body) {
  std::string rec = encode_record(kind, body);
  if (std::fwrite(rec.data(), 1, rec.size(), log_) != rec.size()) {
    throw Error(ErrorCode::IoError, "short write to " + (dir_ / kLogFile).string());
  }
  ++log_records_;
}

void GraphStore::flush() {
  std::lock_guard lock(mu_);
  if (!log_) return;
  std::fflush(log_);
  if (opts_.fsync) ::fsync(fileno(log_));
}

MergeDelta GraphStore::merge(const RefactorResult& result) {
  std::lock_guard lock(mu_);
  MergeDelta delta = merge_into_graph(graph_, result);
  if (delta.touched.empty() && delta.edges_added == 0) return delta;
  for (const auto& id : delta.touched) append(RecordKind::NodeUpsert, to_json(*graph_.find(id)));
  std::vector<NodeId> ids;
  for (const auto& n : result.nodes) ids.push_back(graph_.find(n.etype, n.description)->id);
  for (const auto& e : result.edges) {
    EdgeKey key{ids[e.src], ids[e.dst], e.verb, result.report_id};
    append(RecordKind::EdgeInsert, edge_json(key, graph_.edges().at(key)));
  }
  std::fflush(log_);
  maybe_snapshot();
  return delta;
}

FusionReport GraphStore::fuse(const AliasTable& table) {
  std::lock_guard lock(mu_);
  FusionReport report;
  for (const auto& g : table.groups()) {
    auto outcome = fuse_group(graph_, g);
    if (outcome.applied) append(RecordKind::Fusion, to_json(g));
    report.groups.push_back(std::move(outcome));
  }
  std::fflush(log_);
  maybe_snapshot();
  return report;
}

void GraphStore::maybe_snapshot() {
  if (opts_.snapshot_every == 0 || log_records_ < opts_.snapshot_every) return;
  std::fflush(log_);
  std::uint64_t next = generation_ + 1;
  write_file_atomic(dir_ / kSnapshotFile, header(kSnapshotMagic, next) + serialize(graph_), opts_.fsync);
  generation_ = next;
  write_file_atomic(dir_ / kLogFile, header(kLogMagic, next), opts_.fsync);
  log_records_ = 0;
  open_log_for_append(kHeaderSize);
}

void GraphStore::snapshot() {
  std::lock_guard lock(mu_);
  std::size_t saved = opts_.snapshot_every;
  opts_.snapshot_every = 1;
  log_records_ = std::max<std::size_t>(log_records_, 1);
  maybe_snapshot();
  opts_.snapshot_every = saved;
}

std::shared_ptr<const OntologyGraph> GraphStore::view() const {
  std::lock_guard lock(mu_);
  return std::make_shared<const OntologyGraph>(graph_);
}

nlohmann::json GraphStore::runs() const {
  fs::path p = dir_ / kMetaFile;
  if (!fs::exists(p)) return nlohmann::json::array();
  try {
    auto j = nlohmann::json::parse(read_file(p));
    return j.value("runs", nlohmann::json::array());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("meta.json is not valid JSON: ") + e.what());
  }
}

void GraphStore::append_run(const nlohmann::json& run) {
  auto all = runs();
  all.push_back(run);
  write_file_atomic(dir_ / kMetaFile, nlohmann::json{{"runs", all}}.dump(2) + "\n", opts_.fsync);
}

}  // namespace skg::kgraph
