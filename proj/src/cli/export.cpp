#include "codetrail/cli/export.hpp"

#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "codetrail/error.hpp"
#include "codetrail/event/hash.hpp"

namespace fs = std::filesystem;

namespace codetrail::cli {

namespace {

constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kEventsFile = "events.ndjson";

std::string scrub_paths(const std::string& text) {
  static const std::regex unix_path(R"((^|[\s'"(=:,\[])/[^\s'"():,\]]+)");
  static const std::regex windows_path(R"((^|[\s'"(=:,\[])[A-Za-z]:[\\/][^\s'"():,\]]*)");
  return std::regex_replace(std::regex_replace(text, unix_path, "$1<path>"), windows_path, "$1<path>");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NoSuchFile, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
  out.flush();
  if (!out) throw Error(ErrorCode::DiskError, "cannot write " + path.string());
}

class Rewriter {
 public:
  explicit Rewriter(const std::string& salt) : salt_(salt) {}

  Event rewrite(const Event& in) {
    Event e = in;
    e.actor_id = pseudonym(salt_, in.actor_id);
    e.workspace_id = "ws-" + pseudonym(salt_, "workspace:" + in.workspace_id);
    if (auto* diff = std::get_if<FileDiffPayload>(&e.payload)) diff->base_event_id = mapped(diff->base_event_id);
    if (auto* diag = std::get_if<DiagnosticPayload>(&e.payload)) {
      diag->message = scrub_paths(diag->message);
      diag->source = scrub_paths(diag->source);
    }
    if (auto* run = std::get_if<RunStartPayload>(&e.payload)) run->command = scrub_paths(run->command);
    seal_event_id(e);
    ids_.emplace(in.event_id, e.event_id);
    return e;
  }

 private:
  std::string mapped(const std::string& id) const {
    auto it = ids_.find(id);
    // A base outside the exported range still needs an id that reveals nothing.
    return it != ids_.end() ? it->second : hmac_sha256_hex(salt_, "event:" + id);
  }

  const std::string& salt_;
  std::map<std::string, std::string> ids_;
};

}  // namespace

std::string pseudonym(const std::string& salt, const std::string& actor_id) {
  return hmac_sha256_hex(salt, actor_id).substr(0, 16);
}

std::string salt_fingerprint(const std::string& salt) {
  return sha256_hex("codetrail-salt-fp:" + salt).substr(0, 16);
}

ExportBundle export_bundle(const store::EventStore& store, const ExportOptions& options) {
  if (!options.raw && options.salt.empty())
    throw Error(ErrorCode::InvalidArgument, "a pseudonymized export needs a salt");
  options.filter.check();
  const auto report = store.verify();
  if (!report.clean()) {
    std::string why = report.problems.empty() ? "segment problems" : report.problems.front();
    for (const auto& seg : report.segments)
      if (!seg.problems.empty()) why = seg.name + ": " + seg.problems.front();
    throw Error(ErrorCode::DirtyStore, "store does not verify clean (" + why + "); run `codetrail verify`");
  }

  ExportBundle bundle;
  Rewriter rewriter(options.salt);
  std::size_t count = 0;
  std::optional<Seq> first, last;
  Timestamp newest;
  store.scan(store::EventFilter{}, [&](const StoredEvent& s) {
    newest = std::max(newest, s.received_ts);
    // Every event passes through the rewriter so links into filtered-out events stay consistent.
    StoredEvent out = s;
    if (!options.raw) out.event = rewriter.rewrite(s.event);
    if (options.filter.matches(s)) {
      bundle.events += encode_stored_event(out);
      bundle.events += '\n';
      ++count;
      if (!first) first = s.seq;
      last = s.seq;
    }
    return true;
  });
  bundle.manifest = {{"schema_version", kSchemaVersion},
                     {"event_count", count},
                     {"seq_range", first ? json{{"first", *first}, {"last", *last}} : json(nullptr)},
                     {"created_ts", newest.to_string()},
                     {"pseudonymized", !options.raw},
                     {"pseudonym_salt_fingerprint", options.raw ? json(nullptr) : json(salt_fingerprint(options.salt))},
                     {"events_sha256", sha256_hex(bundle.events)}};
  return bundle;
}

void write_bundle(const ExportBundle& bundle, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::DiskError, "cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / kEventsFile, bundle.events);
  write_file(dir / kManifestFile, canonical_dump(bundle.manifest) + "\n");
}

ExportBundle read_bundle(const fs::path& dir) {
  ExportBundle bundle;
  try {
    bundle.manifest = json::parse(read_file(dir / kManifestFile));
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::MalformedBody, std::string("manifest.json: ") + ex.what());
  }
  bundle.events = read_file(dir / kEventsFile);
  if (bundle.manifest.value("events_sha256", std::string()) != sha256_hex(bundle.events))
    throw Error(ErrorCode::MalformedBody, "events.ndjson does not match the manifest digest");
  return bundle;
}

store::IngestReceipt import_bundle(store::IngestService& ingest, const ExportBundle& bundle) {
  std::string body;
  std::istringstream in(bundle.events);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    body += encode_event(decode_stored_event(line).event);
    body += '\n';
  }
  return ingest.ingest_trusted(body);
}

}  // namespace codetrail::cli
