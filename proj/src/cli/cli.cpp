#include "codetrail/cli/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "codetrail/analytics/report_format.hpp"
#include "codetrail/capture/agent.hpp"
#include "codetrail/cli/export.hpp"
#include "codetrail/error.hpp"
#include "codetrail/integrity/integrity_report.hpp"
#include "codetrail/store/http_server.hpp"

namespace fs = std::filesystem;

namespace codetrail::cli {

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

void install_signal_handlers() {
  g_interrupted = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
}

// Bad flag values that CLI11 cannot see; exit code 2 like any other usage error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Timestamp parse_time_flag(const std::string& flag, const std::string& value) {
  auto ts = Timestamp::parse_lenient(value);
  if (!ts) throw UsageError(flag + ": not a timestamp: " + value);
  return *ts;
}

std::set<EventKind> parse_kinds(const std::string& list) {
  std::set<EventKind> kinds;
  std::stringstream in(list);
  for (std::string name; std::getline(in, name, ',');) {
    if (name.empty()) continue;
    auto kind = parse_event_kind(name);
    if (!kind) throw UsageError("--kind: unknown event kind " + name);
    kinds.insert(*kind);
  }
  return kinds;
}

std::string read_secret_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path);
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

store::EventStore open_reader(const std::string& dir) {
  store::StoreOptions options;
  options.read_only = true;
  return store::EventStore(dir, options);
}

std::vector<StoredEvent> load_events(const store::EventStore& store, const store::EventFilter& filter,
                                     std::ostream& err) {
  auto result = store.scan(filter);
  for (const auto& e : result.errors) err << "warning: " << e.segment << ": " << e.reason << '\n';
  return std::move(result.events);
}

void print_json(std::ostream& out, const json& value) { out << canonical_dump(value) << '\n'; }

json verify_json(const store::VerifyReport& r) {
  json segments = json::array();
  for (const auto& s : r.segments)
    segments.push_back({{"name", s.name},
                        {"first_seq", s.first_seq},
                        {"last_seq", s.last_seq},
                        {"event_count", s.event_count},
                        {"sealed", s.sealed},
                        {"problems", s.problems}});
  json gaps = json::array();
  for (const auto& [a, b] : r.gaps) gaps.push_back({a, b});
  return {{"clean", r.clean()},
          {"event_count", r.event_count},
          {"segments", segments},
          {"gaps", gaps},
          {"problems", r.problems}};
}

// Wakes every 100 ms; calls `on_stop` once SIGINT/SIGTERM arrives, the deadline
// passes, or the thread is asked to stop.
std::jthread stop_watcher(std::function<void()> on_stop, std::int64_t duration_ms) {
  const auto deadline = duration_ms > 0 ? std::chrono::steady_clock::now() + std::chrono::milliseconds(duration_ms)
                                        : std::chrono::steady_clock::time_point::max();
  return std::jthread([on_stop = std::move(on_stop), deadline](std::stop_token st) {
    while (!st.stop_requested() && !g_interrupted && std::chrono::steady_clock::now() < deadline)
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    on_stop();
  });
}

struct Flags {
  std::string data_dir;
  std::string config;
  std::string token;
  bool json_out = false;

  // watch
  bool once = false;
  bool offline = false;
  std::int64_t duration_ms = 0;

  // emit
  std::string kind;
  std::string payload = "{}";
  std::string client_ts;

  // serve
  std::string listen = "127.0.0.1:8750";
  std::string roster;
  std::string port_file;
  std::size_t segment_max_events = 4096;
  std::size_t max_body_bytes = 8u << 20;

  // filters
  std::string actor;
  std::string workspace;
  std::string exercise;
  std::string kinds;
  std::string from;
  std::string to;

  // reports
  std::size_t top = 10;
  std::int64_t gap_seconds = analytics::kDefaultSessionGapSeconds;
  std::int64_t active_cap_seconds = 120;
  std::string run_a;
  std::string run_b;

  // integrity
  double sim = 0.5;
  double coupling = 0.6;
  std::int64_t window_seconds = integrity::kDefaultCouplingWindowSeconds;
  std::string profile = "c";
  std::string profiles_dir;
  std::size_t k = integrity::kDefaultK;
  std::size_t w = integrity::kDefaultW;

  // export / import
  std::string out_dir;
  std::string salt_file;
  std::string salt_env = "CODETRAIL_EXPORT_SALT";
  bool raw = false;
  std::string bundle;

  // replay
  std::string file;
  std::optional<Seq> at_seq;
};

store::EventFilter filter_from(const Flags& f) {
  store::EventFilter filter;
  if (!f.actor.empty()) filter.actor_id = f.actor;
  if (!f.workspace.empty()) filter.workspace_id = f.workspace;
  if (!f.exercise.empty()) filter.exercise_id = f.exercise;
  filter.kinds = parse_kinds(f.kinds);
  if (!f.from.empty()) filter.from = parse_time_flag("--from", f.from);
  if (!f.to.empty()) filter.to = parse_time_flag("--to", f.to);
  try {
    filter.check();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return filter;
}

int cmd_watch(const Flags& f, std::ostream& out, std::ostream& err) {
  auto config = capture::WatchConfig::load(f.config);
  if (!f.token.empty()) config.auth_token = f.token;
  if (f.once) {
    capture::Spool spool(config.spool_dir, {config.spool_max_bytes, true});
    capture::CaptureSession session(config, spool);
    const auto a = session.tick();
    const auto b = session.flush_pending();
    for (const auto& e : session.io_errors()) err << "warning: " << e.file << ": " << e.message << '\n';
    out << "captured " << a.size() + b.size() << " events; spool holds " << spool.pending_count() << " pending\n";
    if (f.offline) return 0;
    capture::HttpTransport transport(config.server_url);
    capture::FlushOptions options;
    options.token = config.auth_token;
    options.batch_size = config.batch_size;
    options.retry.max_attempts = 3;
    const auto receipt = capture::flush(spool, transport, options);
    out << "delivery " << capture::to_string(receipt.status) << ": sent " << receipt.sent << ", acked "
        << receipt.acked << ", rejected " << receipt.rejected << '\n';
    if (receipt.status != capture::DeliveryStatus::Ok) {
      err << "error: " << capture::to_string(receipt.status) << ": " << receipt.message << '\n';
      return 1;
    }
    return 0;
  }

  std::unique_ptr<capture::Transport> transport;
  if (f.offline) {
    struct Offline : capture::Transport {
      capture::TransportResponse post_events(const std::string&, const std::string&) override {
        return {0, {}, "offline"};
      }
    };
    transport = std::make_unique<Offline>();
  } else {
    transport = std::make_unique<capture::HttpTransport>(config.server_url);
  }
  capture::Agent agent(config, std::move(transport), err);
  std::stop_source stop;
  install_signal_handlers();
  auto watcher = stop_watcher([&] { stop.request_stop(); }, f.duration_ms);
  out << "watching " << config.workspace_root.string() << " (Ctrl-C to stop)\n" << std::flush;
  agent.run(stop.get_token());
  watcher.request_stop();
  const auto stats = agent.stats();
  out << "captured " << stats.captured << " events, delivered " << stats.delivered << '\n';
  return 0;
}

int cmd_emit(const Flags& f, std::ostream& out) {
  const auto config = capture::WatchConfig::load(f.config);
  json drop;
  try {
    drop = {{"kind", f.kind}, {"payload", json::parse(f.payload)}};
  } catch (const json::exception& ex) {
    throw UsageError(std::string("--payload is not JSON: ") + ex.what());
  }
  // The timestamp is fixed now so a drop delivered twice keeps one event id.
  drop["client_ts"] = (f.client_ts.empty() ? Timestamp::now() : parse_time_flag("--client-ts", f.client_ts)).to_string();
  const Event event = capture::event_from_drop(drop, config, Timestamp::now());

  const fs::path inbox = config.spool_dir / "inbox";
  fs::create_directories(inbox);
  const std::string name = drop["client_ts"].get<std::string>() + "-" + event.event_id.substr(0, 12);
  const fs::path tmp = inbox / (name + ".tmp");
  {
    std::ofstream file(tmp, std::ios::binary);
    file << canonical_dump(drop) << '\n';
    if (!file) throw Error(ErrorCode::DiskError, "cannot write " + tmp.string());
  }
  fs::rename(tmp, inbox / (name + ".json"));
  out << event.event_id << '\n';
  return 0;
}

int cmd_serve(const Flags& f, std::ostream& out) {
  store::StoreOptions options;
  options.segment_max_events = f.segment_max_events;
  store::EventStore store(f.data_dir, options);
  store::IngestService ingest(store, store::Roster::load(f.roster), {f.max_body_bytes});
  store::HttpServer server(ingest);
  const auto [host, port] = store::parse_listen_address(f.listen);
  const int bound = server.bind(host, port);
  if (bound < 0) throw Error(ErrorCode::ConfigError, "cannot listen on " + f.listen);
  if (!f.port_file.empty()) std::ofstream(f.port_file) << bound << '\n';
  out << "listening on " << host << ':' << bound << ", store " << f.data_dir << " at seq " << store.max_seq() << '\n'
      << std::flush;
  install_signal_handlers();
  auto watcher = stop_watcher([&] { server.stop(); }, 0);
  server.serve();
  watcher.request_stop();
  out << "stopped at seq " << store.max_seq() << '\n';
  return 0;
}

int cmd_report_student(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto store = open_reader(f.data_dir);
  store::EventFilter filter;
  filter.actor_id = f.actor;
  filter.exercise_id = f.exercise;
  const auto events = load_events(store, filter, err);
  if (events.empty())
    throw Error(ErrorCode::UnknownExercise, "no events for actor '" + f.actor + "' in exercise '" + f.exercise + "'");
  const analytics::MetricsOptions options{f.gap_seconds, f.active_cap_seconds};
  const auto metrics = analytics::compute_metrics(events, options);
  const auto sessions = analytics::sessionize(analytics::activity_events(events), f.gap_seconds);
  if (f.json_out)
    print_json(out, {{"metrics", analytics::to_json(metrics)}, {"sessions", analytics::to_json(sessions)}});
  else
    analytics::print_student_report(out, metrics, sessions);
  return 0;
}

int cmd_report_class(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto store = open_reader(f.data_dir);
  store::EventFilter filter;
  filter.exercise_id = f.exercise;
  const auto events = load_events(store, filter, err);
  if (events.empty()) throw Error(ErrorCode::UnknownExercise, "no events for exercise '" + f.exercise + "'");
  const auto report =
      analytics::class_report(events, f.exercise, f.top, analytics::MetricsOptions{f.gap_seconds, f.active_cap_seconds});
  if (f.json_out)
    print_json(out, analytics::to_json(report));
  else
    analytics::print_class_report(out, report);
  return 0;
}

int cmd_report_runs(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto store = open_reader(f.data_dir);
  store::EventFilter filter;
  filter.actor_id = f.actor;
  const auto events = load_events(store, filter, err);
  const auto delta = analytics::compare_runs(events, f.run_a, f.run_b);
  if (f.json_out)
    print_json(out, analytics::to_json(delta));
  else
    analytics::print_run_delta(out, delta);
  return 0;
}

int cmd_integrity(const Flags& f, std::ostream& out, std::ostream& err) {
  integrity::ProfileRegistry profiles;
  const fs::path dir = f.profiles_dir.empty() ? integrity::default_profile_dir() : fs::path(f.profiles_dir);
  if (fs::is_directory(dir)) profiles.load_dir(dir);
  else if (!f.profiles_dir.empty()) throw Error(ErrorCode::ConfigError, "no profile directory " + f.profiles_dir);
  const auto& profile = profiles.find(f.profile);

  const auto store = open_reader(f.data_dir);
  store::EventFilter filter;
  filter.exercise_id = f.exercise;
  const auto events = load_events(store, filter, err);
  if (events.empty()) throw Error(ErrorCode::UnknownExercise, "no events for exercise '" + f.exercise + "'");
  integrity::IntegrityOptions options;
  options.sim_threshold = f.sim;
  options.coupling_threshold = f.coupling;
  options.window_seconds = f.window_seconds;
  options.k = f.k;
  options.w = f.w;
  const auto report = integrity::integrity_report(events, f.exercise, profile, options);
  if (f.json_out)
    print_json(out, integrity::to_json(report));
  else
    integrity::print_integrity_report(out, report);
  return 0;
}

int cmd_export(const Flags& f, std::ostream& out) {
  ExportOptions options;
  options.filter = filter_from(f);
  options.raw = f.raw;
  if (!f.raw) {
    if (!f.salt_file.empty()) {
      options.salt = read_secret_file(f.salt_file);
    } else if (const char* env = std::getenv(f.salt_env.c_str())) {
      options.salt = env;
    }
    if (options.salt.empty())
      throw UsageError("a salt is required: --salt-file <file> or the " + f.salt_env + " environment variable");
  }
  const auto store = open_reader(f.data_dir);
  const auto bundle = export_bundle(store, options);
  write_bundle(bundle, f.out_dir);
  out << "exported " << bundle.manifest["event_count"].get<std::size_t>() << " events to " << f.out_dir << '\n';
  return 0;
}

int cmd_import(const Flags& f, std::ostream& out) {
  const auto bundle = read_bundle(f.bundle);
  store::EventStore store(f.data_dir);
  store::IngestService ingest(store, store::Roster{});
  const auto receipt = import_bundle(ingest, bundle);
  out << "accepted " << receipt.accepted.size() << ", duplicates " << receipt.duplicates.size() << ", rejected "
      << receipt.rejected.size() << '\n';
  return receipt.rejected.empty() ? 0 : 1;
}

int cmd_verify(const Flags& f, std::ostream& out) {
  const auto store = open_reader(f.data_dir);
  const auto report = store.verify();
  if (f.json_out) {
    print_json(out, verify_json(report));
  } else {
    out << report.segments.size() << " segments, " << report.event_count << " events\n";
    for (const auto& s : report.segments)
      for (const auto& p : s.problems) out << s.name << ": " << p << '\n';
    for (const auto& [a, b] : report.gaps) out << "missing seqs " << a << ".." << b << '\n';
    for (const auto& p : report.problems) out << p << '\n';
    out << (report.clean() ? "clean\n" : "NOT clean\n");
  }
  return report.clean() ? 0 : 1;
}

int cmd_replay(const Flags& f, std::ostream& out) {
  const auto store = open_reader(f.data_dir);
  out << store.reconstruct_file(f.actor, f.workspace, f.file, f.at_seq.value_or(store.max_seq()));
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"codetrail: capture, store and analyse student code-development logs", "codetrail"};
  app.require_subcommand(1);
  Flags f;

  auto data_dir = [&](CLI::App* cmd) { cmd->add_option("--data-dir", f.data_dir, "Event store directory")->required(); };
  auto json_flag = [&](CLI::App* cmd) { cmd->add_flag("--json", f.json_out, "Machine-readable JSON output"); };

  auto* watch = app.add_subcommand("watch", "Capture a workspace and deliver events to the server");
  watch->add_option("--config", f.config, "key=value watch config file")->required();
  watch->add_option("--token", f.token, "Auth token (else auth_token or CODETRAIL_TOKEN)");
  watch->add_flag("--once", f.once, "Take one snapshot pass, flush, and exit");
  watch->add_flag("--offline", f.offline, "Spool only; never contact the server");
  watch->add_option("--duration-ms", f.duration_ms, "Stop after this long (0 = until Ctrl-C)");

  auto* emit = app.add_subcommand("emit", "Queue a diagnostic, run or submission event for a running watcher");
  emit->add_option("--config", f.config, "Watch config of the workspace")->required();
  emit->add_option("--kind", f.kind, "Diagnostic, RunStart, RunEnd, Submission or FileOpen")->required();
  emit->add_option("--payload", f.payload, "Payload JSON");
  emit->add_option("--client-ts", f.client_ts, "Event time (default now)");

  auto* serve = app.add_subcommand("serve", "Run the ingest server");
  data_dir(serve);
  serve->add_option("--listen", f.listen, "host:port to listen on (port 0 picks one)")->capture_default_str();
  serve->add_option("--roster", f.roster, "Token roster file: '<token> <actor_id>' per line")->required();
  serve->add_option("--port-file", f.port_file, "Write the bound port here");
  serve->add_option("--segment-max-events", f.segment_max_events, "Events per segment before sealing")
      ->capture_default_str();
  serve->add_option("--max-body-bytes", f.max_body_bytes, "Largest accepted POST body")->capture_default_str();

  auto* report = app.add_subcommand("report", "Progress reports");
  report->require_subcommand(1);
  auto* student = report->add_subcommand("student", "Metrics and sessions of one actor in one exercise");
  data_dir(student);
  student->add_option("--actor", f.actor, "Actor id")->required();
  student->add_option("--exercise", f.exercise, "Exercise id")->required();
  auto* klass = report->add_subcommand("class", "Per-actor metrics, quartiles and common errors of an exercise");
  data_dir(klass);
  klass->add_option("--exercise", f.exercise, "Exercise id")->required();
  klass->add_option("--top", f.top, "Error messages to list")->capture_default_str();
  auto* runs = report->add_subcommand("runs", "Diagnostics resolved and introduced between two runs");
  data_dir(runs);
  runs->add_option("--actor", f.actor, "Actor id")->required();
  runs->add_option("--run-a", f.run_a, "Earlier run id")->required();
  runs->add_option("--run-b", f.run_b, "Later run id")->required();
  for (auto* cmd : {student, klass, runs}) {
    json_flag(cmd);
    cmd->add_option("--gap", f.gap_seconds, "Idle seconds that end a session")->capture_default_str();
    cmd->add_option("--active-cap", f.active_cap_seconds, "Cap on each gap counted as active time")
        ->capture_default_str();
  }

  auto* integ = app.add_subcommand("integrity", "Pairwise similarity and timing signals for human review");
  data_dir(integ);
  json_flag(integ);
  integ->add_option("--exercise", f.exercise, "Exercise id")->required();
  integ->add_option("--sim", f.sim, "Content similarity threshold")->capture_default_str();
  integ->add_option("--coupling", f.coupling, "Temporal coupling threshold")->capture_default_str();
  integ->add_option("--window", f.window_seconds, "Coupling window in seconds")->capture_default_str();
  integ->add_option("--profile", f.profile, "Language profile")->capture_default_str();
  integ->add_option("--profiles-dir", f.profiles_dir, "Directory of profile tables");
  integ->add_option("--k", f.k, "k-gram length in tokens")->capture_default_str();
  integ->add_option("--w", f.w, "Winnowing window")->capture_default_str();

  auto* exp = app.add_subcommand("export", "Write a pseudonymized dataset bundle");
  data_dir(exp);
  exp->add_option("--out", f.out_dir, "Bundle directory")->required();
  exp->add_option("--salt-file", f.salt_file, "File holding the pseudonym salt");
  exp->add_option("--salt-env", f.salt_env, "Environment variable holding the salt")->capture_default_str();
  exp->add_flag("--raw", f.raw, "Keep real identities (backups only; not shareable)");
  exp->add_option("--actor", f.actor, "Only this actor");
  exp->add_option("--workspace", f.workspace, "Only this workspace");
  exp->add_option("--exercise", f.exercise, "Only this exercise");
  exp->add_option("--kind", f.kinds, "Comma-separated event kinds");
  exp->add_option("--from", f.from, "client_ts lower bound (inclusive)");
  exp->add_option("--to", f.to, "client_ts upper bound (exclusive)");

  auto* imp = app.add_subcommand("import", "Ingest a bundle into a store (not while serve runs on it)");
  data_dir(imp);
  imp->add_option("--bundle", f.bundle, "Bundle directory")->required();

  auto* verify = app.add_subcommand("verify", "Audit segment footers, event ids and seq order");
  data_dir(verify);
  json_flag(verify);

  auto* replay = app.add_subcommand("replay", "Print a file as of a seq");
  data_dir(replay);
  replay->add_option("--actor", f.actor, "Actor id")->required();
  replay->add_option("--workspace", f.workspace, "Workspace id")->required();
  replay->add_option("--file", f.file, "Workspace-relative path")->required();
  replay->add_option("--at-seq", f.at_seq, "Seq to replay to (default: latest)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    err << "run `codetrail --help` for the command list\n";
    return 2;
  }

  try {
    if (*watch) return cmd_watch(f, out, err);
    if (*emit) return cmd_emit(f, out);
    if (*serve) return cmd_serve(f, out);
    if (*student) return cmd_report_student(f, out, err);
    if (*klass) return cmd_report_class(f, out, err);
    if (*runs) return cmd_report_runs(f, out, err);
    if (*integ) return cmd_integrity(f, out, err);
    if (*exp) return cmd_export(f, out);
    if (*imp) return cmd_import(f, out);
    if (*verify) return cmd_verify(f, out);
    if (*replay) return cmd_replay(f, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace codetrail::cli
