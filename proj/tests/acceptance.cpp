// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "codetrail/analytics/class_report.hpp"
#include "codetrail/analytics/metrics.hpp"
#include "codetrail/analytics/normalize.hpp"
#include "codetrail/analytics/report_format.hpp"
#include "codetrail/analytics/runs.hpp"
#include "codetrail/analytics/sessionize.hpp"
#include "codetrail/capture/capture_session.hpp"
#include "codetrail/capture/delivery.hpp"
#include "codetrail/cli/export.hpp"
#include "codetrail/integrity/integrity_report.hpp"
#include "codetrail/integrity/profile.hpp"
#include "codetrail/store/http_server.hpp"
#include "programs.hpp"
#include "support.hpp"

using namespace codetrail;
using namespace codetrail::testing;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned limits.
constexpr int kReplaySequences = 100;
constexpr int kReplayMaxEdits = 50;
constexpr int kReplayMaxFiles = 3;
constexpr double kReplayBudgetSeconds = 60.0;
constexpr int kCrashPoints = 20;
constexpr int kWinnowPairs = 200;
constexpr std::size_t kWinnowMaxTokens = 500;
constexpr double kWinnowBudgetSeconds = 30.0;
constexpr int kRenamePrograms = 50;
constexpr int kClassActors = 6;
constexpr std::size_t kOracleStoreEvents = 1000;
constexpr std::size_t kThroughputEvents = 10000;
constexpr std::size_t kThroughputBatch = 500;
constexpr double kIngestBudgetSeconds = 10.0;
constexpr double kVerifyBudgetSeconds = 5.0;

struct Crash {};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

store::StoreOptions store_options(bool sync = false, std::size_t segment_max = 4096) {
  store::StoreOptions o;
  o.segment_max_events = segment_max;
  o.sync = sync;
  return o;
}

capture::SpoolOptions spool_options(bool sync = false) {
  capture::SpoolOptions o;
  o.sync = sync;
  return o;
}

std::string ndjson(std::span<const Event> events) {
  std::string body;
  for (const auto& e : events) body += encode_event(e) + "\n";
  return body;
}

// ---------------------------------------------------------------------------

Outcome replay_fidelity() {
  std::mt19937_64 rng(101);
  const auto start = Clock::now();
  int exact = 0;
  std::string first_failure;
  for (int seq = 0; seq < kReplaySequences; ++seq) {
    TempDir dir;
    capture::WatchConfig config;
    config.workspace_root = dir / "ws";
    config.spool_dir = dir / "spool";
    config.actor_id = "s-" + std::to_string(seq);
    config.workspace_id = "ws-replay";
    config.exercise_id = "lab";
    config.debounce_ms = 1000;
    config.snapshot_every = 1 + static_cast<std::uint32_t>(rng() % 20);
    std::filesystem::create_directories(config.workspace_root);

    const int files = 1 + static_cast<int>(rng() % kReplayMaxFiles);
    std::map<std::string, std::string> disk;
    for (int f = 0; f < files; ++f) {
      const std::string name = f == 0 ? "main.c" : "src/part" + std::to_string(f) + ".c";
      if (f == 0 || rng() % 2) {
        disk[name] = random_text(rng, 15);
        write_file(config.workspace_root / name, disk[name]);
      }
    }

    ManualClock clock;
    capture::Spool spool(config.spool_dir, spool_options());
    capture::CaptureSession session(config, spool, clock);
    session.tick();
    const int edits = 1 + static_cast<int>(rng() % kReplayMaxEdits);
    for (int e = 0; e < edits; ++e) {
      const int f = static_cast<int>(rng() % files);
      const std::string name = f == 0 ? "main.c" : "src/part" + std::to_string(f) + ".c";
      auto& text = disk[name];
      text = rng() % 8 == 0 ? random_text(rng, 15) : random_edit(rng, text);
      write_file(config.workspace_root / name, text);
      clock.advance(100 + static_cast<std::int64_t>(rng() % 2900));  // inside and past the debounce window
      session.tick();
    }
    clock.advance(10000);
    session.tick();
    session.flush_pending();

    store::EventStore store(dir / "store", store_options());
    store::IngestService ingest(store, store::Roster::parse("tok " + config.actor_id + "\n"));
    LoopbackTransport transport(ingest);
    capture::FlushOptions options;
    options.token = "tok";
    options.retry = no_sleep_retry();
    const auto receipt = capture::flush(spool, transport, options);

    bool ok = receipt.status == capture::DeliveryStatus::Ok && spool.pending_count() == 0;
    for (const auto& [name, text] : disk) {
      if (!ok) break;
      try {
        ok = store.reconstruct_file(config.actor_id, config.workspace_id, name, store.max_seq()) == text;
      } catch (const Error& err) {
        ok = false;
        if (first_failure.empty()) first_failure = err.what();
      }
      if (!ok && first_failure.empty()) first_failure = "sequence " + std::to_string(seq) + " file " + name;
    }
    exact += ok;
  }
  const double elapsed = seconds_since(start);
  std::ostringstream d;
  d << exact << "/" << kReplaySequences << " byte-exact in " << elapsed << " s (limit " << kReplayBudgetSeconds
    << " s)";
  if (!first_failure.empty()) d << "; first mismatch: " << first_failure;
  return {exact == kReplaySequences && elapsed < kReplayBudgetSeconds, d.str()};
}

// ---------------------------------------------------------------------------

std::vector<Event> class_events(std::mt19937_64& rng, int actors, int per_actor, const std::string& exercise) {
  std::vector<Event> events;
  for (int a = 0; a < actors; ++a) {
    const std::string actor = "stu-" + std::to_string(a);
    std::int64_t t = static_cast<std::int64_t>(rng() % 600);
    std::string text = random_text(rng, 12);
    Event prev = make(actor, t, FileSnapshotPayload{"main.c", text, count_lines(text)}, exercise);
    events.push_back(prev);
    for (int i = 0; i < per_actor; ++i) {
      t += 1 + static_cast<std::int64_t>(rng() % (rng() % 10 == 0 ? 2000 : 200));
      switch (rng() % 5) {
        case 0: {
          const std::string next = random_edit(rng, text);
          auto hunks = compute_diff(text, next);
          if (hunks.empty()) break;
          prev = make(actor, t, FileDiffPayload{"main.c", prev.event_id, hunks}, exercise);
          events.push_back(prev);
          text = next;
          break;
        }
        case 1:
          events.push_back(make(actor, t,
                                DiagnosticPayload{rng() % 3 ? DiagnosticLevel::Error : DiagnosticLevel::Warning,
                                                  "undefined variable 'v" + std::to_string(rng() % 5) + "' at line " +
                                                      std::to_string(rng() % 90),
                                                  "main.c", 1 + static_cast<std::uint32_t>(rng() % 40), "gcc"},
                                exercise));
          break;
        case 2: {
          const std::string run = "r" + std::to_string(i);
          events.push_back(make(actor, t, RunStartPayload{run, "gcc /home/" + actor + "/main.c"}, exercise));
          if (rng() % 2)
            events.push_back(make(actor, t, DiagnosticPayload{DiagnosticLevel::Error, "expected ';'", "main.c", 3, "gcc"},
                                  exercise));
          events.push_back(make(actor, t + 1, RunEndPayload{run, 0}, exercise));
          break;
        }
        case 3:
          events.push_back(make(actor, t, HeartbeatPayload{}, exercise));
          break;
        default:
          events.push_back(make(actor, t, SubmissionPayload{}, exercise));
          break;
      }
    }
  }
  return events;
}

Outcome insert_only_idempotence() {
  TempDir dir;
  std::mt19937_64 rng(202);
  store::EventStore store(dir / "store", store_options(false, 100));
  store::IngestService ingest(store, store::Roster::parse("admin *\n"));
  const auto events = class_events(rng, 5, 60, "lab");
  ingest.ingest_batch(ndjson(events), "admin");
  const Seq before = store.max_seq();

  // (a) a raw export of the whole store, ingested back into it
  cli::ExportOptions raw;
  raw.raw = true;
  const auto raw_bundle = cli::export_bundle(store, raw);
  const auto again = cli::import_bundle(ingest, raw_bundle);
  const bool same_store = again.accepted.empty() && store.max_seq() == before;

  // (b) a pseudonymized export, ingested twice into a fresh store
  cli::ExportOptions shared;
  shared.salt = "acceptance-salt";
  const auto bundle = cli::export_bundle(store, shared);
  store::EventStore fresh(dir / "fresh", store_options());
  store::IngestService fresh_ingest(fresh, store::Roster::parse("admin *\n"));
  const auto first = cli::import_bundle(fresh_ingest, bundle);
  const Seq after_first = fresh.max_seq();
  const auto second = cli::import_bundle(fresh_ingest, bundle);
  const bool fresh_twice = first.accepted.size() == before && second.accepted.empty() && fresh.max_seq() == after_first;

  // API audit over HTTP: nothing but GET/POST on the event log, and no route changes stored events.
  store::HttpServer server(ingest);
  const int port = server.bind("127.0.0.1", 0);
  std::thread serving([&] { server.serve(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  const httplib::Headers auth = {{"Authorization", "Bearer admin"}};
  int refused = 0, probes = 0;
  const std::string some_id = events.front().event_id;
  for (const std::string& path : std::vector<std::string>{"/v1/events", "/v1/events/" + some_id, "/v1/events/1"}) {
    std::vector<httplib::Result> results;
    results.push_back(client.Put(path, auth, "{}", "application/json"));
    results.push_back(client.Patch(path, auth, "{}", "application/json"));
    results.push_back(client.Delete(path, auth));
    for (const auto& r : results) {
      ++probes;
      refused += r && r->status == 405;
    }
  }
  const auto listing = client.Get("/v1/events", auth);
  server.stop();
  serving.join();
  const bool surface_ok = refused == probes && listing && listing->status == 200 && store.max_seq() == before &&
                          store.verify().clean();

  std::ostringstream d;
  d << "raw re-ingest new seqs " << store.max_seq() - before << "; pseudonymized bundle into fresh store "
    << first.accepted.size() << " then " << second.accepted.size() << "; mutating probes refused " << refused << "/"
    << probes;
  return {same_store && fresh_twice && surface_ok, d.str()};
}

// ---------------------------------------------------------------------------

Outcome durability() {
  TempDir dir;
  std::mt19937_64 rng(303);
  const auto spool_dir = dir / "spool";
  const auto store_dir = dir / "store";
  const std::string roster = "tok s-dur\n";
  std::set<std::string> captured;
  int fired = 0, event_no = 0;

  // Event ids must stay in the spool until delivered, even across crashes.
  auto capture_some = [&](int n) {
    capture::Spool spool(spool_dir, spool_options(true));
    for (int i = 0; i < n; ++i) {
      const Event e = make("s-dur", event_no, RunEndPayload{"run-" + std::to_string(event_no), 0});
      ++event_no;
      spool.append(e, at(0));
      captured.insert(e.event_id);
    }
  };

  for (int trial = 0; trial < kCrashPoints; ++trial) {
    capture_some(10 + static_cast<int>(rng() % 40));
    const bool server_side = trial % 2 == 1;
    const std::size_t batch = 1 + rng() % 16;
    capture::Spool spool(spool_dir, spool_options(true));
    const std::size_t batches = (spool.pending_count() + batch - 1) / batch;
    int countdown = 1 + static_cast<int>(rng() % ((server_side ? 4 : 3) * batches));

    auto options = store_options(true, 32);
    if (server_side)
      options.fault_hook = [&](store::AppendStage) {
        if (--countdown == 0) throw Crash{};
      };
    store::EventStore store(store_dir, options);
    store::IngestService ingest(store, store::Roster::parse(roster));
    LoopbackTransport transport(ingest);
    capture::FlushOptions flush_options;
    flush_options.token = "tok";
    flush_options.batch_size = batch;
    flush_options.retry = no_sleep_retry(1);
    if (!server_side)
      flush_options.hook = [&](capture::FlushStage) {
        if (--countdown == 0) throw Crash{};
      };
    try {
      capture::flush(spool, transport, flush_options);
    } catch (const Crash&) {
      ++fired;
    }
  }

  // Restart both sides cleanly and let delivery finish.
  store::EventStore store(store_dir, store_options(true, 32));
  store::IngestService ingest(store, store::Roster::parse(roster));
  LoopbackTransport transport(ingest);
  capture::Spool spool(spool_dir, spool_options(true));
  capture::FlushOptions flush_options;
  flush_options.token = "tok";
  flush_options.retry = no_sleep_retry(3);
  capture::flush(spool, transport, flush_options);

  std::set<std::string> stored_ids;
  std::size_t duplicates = 0;
  for (const auto& s : store.scan({}).events) duplicates += !stored_ids.insert(s.event.event_id).second;
  std::size_t lost = 0;
  for (const auto& id : captured) lost += !stored_ids.count(id);
  const bool clean = store.verify().clean();

  std::ostringstream d;
  d << fired << "/" << kCrashPoints << " crash points hit; " << captured.size() << " captured, " << lost << " lost, "
    << duplicates << " duplicated, spool pending " << spool.pending_count() << ", store "
    << (clean ? "verifies clean" : "NOT clean");
  return {fired == kCrashPoints && lost == 0 && duplicates == 0 && stored_ids.size() == captured.size() &&
              spool.pending_count() == 0 && clean,
          d.str()};
}

// ---------------------------------------------------------------------------

Outcome winnowing_guarantee() {
  std::mt19937_64 rng(404);
  const auto start = Clock::now();
  std::size_t violations = 0, runs = 0;
  for (int pair = 0; pair < kWinnowPairs; ++pair) {
    auto a = random_token_stream(rng, kWinnowMaxTokens, 3 + pair % 5);
    auto b = random_token_stream(rng, kWinnowMaxTokens, 3 + pair % 5);
    // Plant a shared run in most pairs so long matches are common, not rare.
    if (pair % 4 != 0 && a.tokens.size() > 60 && b.tokens.size() > 60) {
      const std::size_t len = 8 + rng() % 40;
      const std::size_t from = rng() % (a.tokens.size() - len), to = rng() % (b.tokens.size() - len);
      std::copy(a.tokens.begin() + static_cast<long>(from), a.tokens.begin() + static_cast<long>(from + len),
                b.tokens.begin() + static_cast<long>(to));
    }
    violations += winnowing_violations(a, b, integrity::kDefaultK, integrity::kDefaultW, &runs);
  }
  const double elapsed = seconds_since(start);
  std::ostringstream d;
  d << runs << " common runs of >= " << integrity::kDefaultW + integrity::kDefaultK - 1 << " tokens over "
    << kWinnowPairs << " pairs, " << violations << " without a shared print, " << elapsed << " s (limit "
    << kWinnowBudgetSeconds << " s)";
  return {violations == 0 && runs > 0 && elapsed < kWinnowBudgetSeconds, d.str()};
}

// ---------------------------------------------------------------------------

Outcome rename_invariance() {
  std::mt19937_64 rng(505);
  const integrity::ProfileRegistry profiles;
  const auto& c = profiles.find("c");
  int exact = 0;
  double worst = 0;
  for (int i = 0; i < kRenamePrograms; ++i) {
    const auto program = random_program(rng, 10 + static_cast<int>(rng() % 40));
    const auto original = program.render(random_names(rng, program.identifiers), rng);
    const auto renamed = program.render(random_names(rng, program.identifiers), rng);
    // A partly copied comparison program, so the similarity is neither 0 nor 1.
    auto mixed = random_program(rng, 20);
    mixed.pieces.insert(mixed.pieces.end() - 1, program.pieces.begin() + 1, program.pieces.end() - 1);
    mixed.identifiers = std::max(mixed.identifiers, program.identifiers);
    const auto other = mixed.render(random_names(rng, mixed.identifiers), rng);

    const auto f_orig = integrity::fingerprint(integrity::normalize_tokens(original, c));
    const auto f_ren = integrity::fingerprint(integrity::normalize_tokens(renamed, c));
    const auto f_other = integrity::fingerprint(integrity::normalize_tokens(other, c));
    const double delta = std::abs(integrity::content_similarity(f_orig, f_other) -
                                  integrity::content_similarity(f_ren, f_other));
    worst = std::max(worst, delta);
    exact += delta == 0.0 && integrity::content_similarity(f_orig, f_ren) == 1.0;
  }
  std::ostringstream d;
  d << exact << "/" << kRenamePrograms << " programs unchanged by renaming; largest change " << worst;
  return {exact == kRenamePrograms, d.str()};
}

// ---------------------------------------------------------------------------

Outcome planted_pair() {
  TempDir dir;
  std::mt19937_64 rng(606);
  std::vector<std::vector<Event>> streams;
  const auto copied = random_program(rng, 40);
  // The copy pair: same program, renamed, written in the same minutes.
  streams.push_back(author("s-orig", copied.render(random_names(rng, copied.identifiers), rng), 0));
  streams.push_back(author("s-copy", copied.render(random_names(rng, copied.identifiers), rng), 40));
  for (int i = 0; i < kClassActors - 2; ++i) {
    const auto own = random_program(rng, 40);
    streams.push_back(author("s-" + std::to_string(i), own.render(random_names(rng, own.identifiers), rng),
                             static_cast<std::int64_t>(rng() % 3600)));
  }
  store::EventStore store(dir / "store", store_options());
  store::IngestService ingest(store, store::Roster::parse("admin *\n"));
  std::vector<Event> all;
  for (const auto& m : merge(streams)) all.push_back(m.event);
  ingest.ingest_batch(ndjson(all), "admin");

  const integrity::ProfileRegistry profiles;
  const auto report = integrity::integrity_report(store.scan({}).events, "lab", profiles.find("c"));
  const std::size_t expected_pairs = kClassActors * (kClassActors - 1) / 2;
  bool ok = report.pairs.size() == expected_pairs;
  std::ostringstream d;
  if (ok) {
    const auto& top = report.pairs[0];
    ok = top.actor_a == "s-copy" && top.actor_b == "s-orig" && top.flagged &&
         top.content_similarity > report.pairs[1].content_similarity;
    d << "top pair " << top.actor_a << "/" << top.actor_b << " similarity " << top.content_similarity
      << " coupling " << top.temporal_coupling << (top.flagged ? " flagged" : " not flagged")
      << "; runner-up similarity " << report.pairs[1].content_similarity;
  } else {
    d << report.pairs.size() << " pairs scored, expected " << expected_pairs;
  }
  return {ok, d.str()};
}

// ---------------------------------------------------------------------------

Outcome analytics_oracles() {
  TempDir dir;
  std::mt19937_64 rng(707);
  store::EventStore store(dir / "store", store_options(false, 128));
  store::IngestService ingest(store, store::Roster::parse("admin *\n"));
  auto events = class_events(rng, 8, 140, "lab");
  events.resize(std::min(events.size(), kOracleStoreEvents));
  for (std::size_t i = 0; i < events.size(); i += 97)
    ingest.ingest_batch(ndjson(std::span(events).subspan(i, std::min<std::size_t>(97, events.size() - i))), "admin");
  const auto all = store.scan({}).events;
  int failures = 0;
  std::vector<std::string> notes;

  // sessionize: single-pass oracle per actor, on activity events
  std::map<std::string, std::vector<StoredEvent>> by_actor;
  for (const auto& s : all) by_actor[s.event.actor_id].push_back(s);
  std::size_t sessions_checked = 0;
  for (const auto& [actor, list] : by_actor) {
    const auto got = analytics::sessionize(list, analytics::kDefaultSessionGapSeconds);
    std::vector<std::pair<Seq, Seq>> expected;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i == 0 || list[i].event.client_ts.unix_ms() - list[i - 1].event.client_ts.unix_ms() >
                        analytics::kDefaultSessionGapSeconds * 1000)
        expected.emplace_back(list[i].seq, list[i].seq);
      expected.back().second = list[i].seq;
    }
    bool same = got.size() == expected.size();
    for (std::size_t i = 0; same && i < got.size(); ++i)
      same = got[i].first_seq == expected[i].first && got[i].last_seq == expected[i].second;
    sessions_checked += got.size();
    if (!same) ++failures, notes.push_back("sessionize " + actor);
  }

  // error_histogram: group-by oracle
  std::map<std::string, std::uint64_t> groups;
  for (const auto& s : all)
    if (const auto* d = s.event.as<DiagnosticPayload>(); d && d->level == DiagnosticLevel::Error)
      ++groups[analytics::normalize_message(d->message)];
  std::vector<analytics::ErrorBucket> expected_hist(groups.begin(), groups.end());
  std::stable_sort(expected_hist.begin(), expected_hist.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  if (analytics::error_histogram(all) != expected_hist) ++failures, notes.push_back("histogram");

  // scan: random filters against a linear pass
  for (int trial = 0; trial < 40; ++trial) {
    store::EventFilter f;
    if (rng() % 2) f.actor_id = "stu-" + std::to_string(rng() % 9);
    if (rng() % 2) f.kinds = {kAllEventKinds[rng() % 9], kAllEventKinds[rng() % 9]};
    if (rng() % 2) {
      f.from = at(static_cast<std::int64_t>(rng() % 20000));
      f.to = f.from->plus_ms(static_cast<std::int64_t>(rng() % 20000) * 1000);
    }
    if (rng() % 2) {
      f.from_seq = 1 + rng() % 900;
      f.to_seq = *f.from_seq + rng() % 500;
    }
    std::vector<Seq> expected, got;
    for (const auto& s : all) {
      const auto& e = s.event;
      if (f.actor_id && e.actor_id != *f.actor_id) continue;
      if (!f.kinds.empty() && !f.kinds.count(e.kind)) continue;
      if (f.from && (e.client_ts < *f.from || !(e.client_ts < *f.to))) continue;
      if (f.from_seq && (s.seq < *f.from_seq || s.seq >= *f.to_seq)) continue;
      expected.push_back(s.seq);
    }
    for (const auto& s : store.scan(f).events) got.push_back(s.seq);
    if (got != expected) {
      ++failures;
      notes.push_back("scan filter " + std::to_string(trial));
      break;
    }
  }

  // quartiles: sort-based oracle on the class report and on raw samples
  auto oracle = [](std::vector<double> v, int quarter) {
    std::sort(v.begin(), v.end());
    const std::size_t rank = (static_cast<std::size_t>(quarter) * v.size() + 3) / 4;  // ceil(q·N/4)
    return v[std::max<std::size_t>(rank, 1) - 1];
  };
  const auto report = analytics::class_report(all, "lab", 5);
  std::vector<double> active, churn;
  for (const auto& m : report.actors) {
    active.push_back(m.active_seconds);
    churn.push_back(static_cast<double>(m.churn_lines));
  }
  bool quartiles_ok = report.active_seconds && report.churn_lines;
  if (quartiles_ok)
    quartiles_ok = report.active_seconds->q1 == oracle(active, 1) && report.active_seconds->median == oracle(active, 2) &&
                   report.active_seconds->q3 == oracle(active, 3) && report.churn_lines->q1 == oracle(churn, 1) &&
                   report.churn_lines->median == oracle(churn, 2) && report.churn_lines->q3 == oracle(churn, 3);
  for (std::size_t n = 1; n <= kOracleStoreEvents && quartiles_ok; n += 37) {
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(static_cast<double>(rng() % 500));
    const auto q = analytics::nearest_rank_quartiles(v);
    quartiles_ok = q && q->q1 == oracle(v, 1) && q->median == oracle(v, 2) && q->q3 == oracle(v, 3);
  }
  if (!quartiles_ok) ++failures, notes.push_back("quartiles");

  std::ostringstream d;
  d << all.size() << "-event store: " << sessions_checked << " sessions, " << expected_hist.size()
    << " error buckets, 40 scan filters, quartiles over " << report.actors.size() << " actors";
  for (const auto& n : notes) d << "; mismatch: " << n;
  return {failures == 0 && all.size() == kOracleStoreEvents, d.str()};
}

// ---------------------------------------------------------------------------

Outcome throughput() {
  TempDir dir;
  store::EventStore store(dir / "store", store_options(true));
  store::IngestService ingest(store, store::Roster::parse("admin *\n"));
  std::vector<std::string> bodies;
  for (std::size_t b = 0; b < kThroughputEvents / kThroughputBatch; ++b) {
    std::string body;
    for (std::size_t i = 0; i < kThroughputBatch; ++i) {
      const std::size_t n = b * kThroughputBatch + i;
      body += encode_event(make("stu-" + std::to_string(n % 50), static_cast<std::int64_t>(n),
                                DiagnosticPayload{DiagnosticLevel::Error, "error number " + std::to_string(n),
                                                  "main.c", 1, "gcc"})) +
              "\n";
    }
    bodies.push_back(std::move(body));
  }
  const auto start = Clock::now();
  std::size_t accepted = 0;
  for (const auto& body : bodies) accepted += ingest.ingest_batch(body, "admin").accepted.size();
  const double ingest_s = seconds_since(start);
  const auto vstart = Clock::now();
  const auto report = store.verify();
  const double verify_s = seconds_since(vstart);
  std::ostringstream d;
  d << accepted << " events in batches of " << kThroughputBatch << " ingested in " << ingest_s << " s (limit "
    << kIngestBudgetSeconds << " s), verify " << verify_s << " s (limit " << kVerifyBudgetSeconds << " s)";
  return {accepted == kThroughputEvents && report.clean() && report.event_count == kThroughputEvents &&
              ingest_s < kIngestBudgetSeconds && verify_s < kVerifyBudgetSeconds,
          d.str()};
}

// ---------------------------------------------------------------------------

// Every report the system produces for an exercise, with actor ids passed through
// `rename` so two stores can be compared modulo pseudonyms.
std::string all_reports(const std::vector<StoredEvent>& events, const std::function<std::string(std::string)>& rename) {
  json out;
  std::map<std::string, std::vector<StoredEvent>> by_actor;
  for (const auto& s : events)
    if (s.event.exercise_id == "lab") by_actor[s.event.actor_id].push_back(s);
  for (const auto& [actor, list] : by_actor) {
    json student;
    json metrics = analytics::to_json(analytics::compute_metrics(list));
    metrics["actor_id"] = rename(actor);
    student["metrics"] = metrics;
    student["sessions"] = analytics::to_json(analytics::sessionize(analytics::activity_events(list)));
    for (auto& s : student["sessions"]) s["actor_id"] = rename(actor);
    std::set<std::string> runs;
    for (const auto& s : list)
      if (const auto* r = s.event.as<RunStartPayload>()) runs.insert(r->run_id);
    if (runs.size() >= 2)
      student["runs"] = analytics::to_json(analytics::compare_runs(list, *runs.begin(), *runs.rbegin()));
    out["students"][rename(actor)] = student;
  }
  const auto klass = analytics::class_report(events, "lab", 10);
  json k = analytics::to_json(klass);
  json actors = json::object();
  for (auto a : k["actors"]) {
    const std::string id = rename(a["actor_id"].get<std::string>());
    a["actor_id"] = id;
    actors[id] = a;
  }
  k["actors"] = actors;
  out["class"] = k;

  const integrity::ProfileRegistry profiles;
  const auto integ = integrity::integrity_report(events, "lab", profiles.find("c"));
  json pairs = json::object();
  for (const auto& p : integ.pairs) {
    auto a = rename(p.actor_a), b = rename(p.actor_b);
    if (b < a) std::swap(a, b);
    pairs[a + "|" + b] = {p.content_similarity, p.temporal_coupling, p.flagged};
  }
  out["integrity"] = pairs;
  return canonical_dump(out);
}

Outcome export_round_trip() {
  TempDir dir;
  std::mt19937_64 rng(909);
  store::EventStore store(dir / "store", store_options());
  store::IngestService ingest(store, store::Roster::parse("admin *\n"));
  const auto events = class_events(rng, 6, 80, "lab");
  ingest.ingest_batch(ndjson(events), "admin");

  const std::string salt = "round-trip-salt";
  cli::ExportOptions options;
  options.salt = salt;
  cli::write_bundle(cli::export_bundle(store, options), dir / "bundle");
  const auto bundle = cli::read_bundle(dir / "bundle");
  store::EventStore fresh(dir / "fresh", store_options());
  store::IngestService fresh_ingest(fresh, store::Roster::parse("admin *\n"));
  cli::import_bundle(fresh_ingest, bundle);

  const std::string original =
      all_reports(store.scan({}).events, [&](const std::string& actor) { return cli::pseudonym(salt, actor); });
  const std::string imported = all_reports(fresh.scan({}).events, [](const std::string& actor) { return actor; });

  std::set<std::string> actors;
  for (const auto& e : events) actors.insert(e.actor_id);
  std::string pattern;
  for (const auto& a : actors) pattern += (pattern.empty() ? "" : "|") + a;
  const std::string bytes = read_file(dir / "bundle" / "events.ndjson") + read_file(dir / "bundle" / "manifest.json");
  std::size_t raw_hits = 0;
  const std::regex actor_re("(" + pattern + ")");
  for (auto it = std::sregex_iterator(bytes.begin(), bytes.end(), actor_re); it != std::sregex_iterator(); ++it)
    ++raw_hits;

  std::ostringstream d;
  d << fresh.size() << "/" << store.size() << " events re-ingested; reports "
    << (original == imported ? "identical" : "DIFFER") << " modulo pseudonyms (" << original.size()
    << " bytes of report JSON); raw actor ids in bundle: " << raw_hits;
  return {fresh.size() == store.size() && original == imported && raw_hits == 0, d.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"replay fidelity", replay_fidelity},
      {"insert-only and idempotence", insert_only_idempotence},
      {"durability under crashes", durability},
      {"winnowing guarantee", winnowing_guarantee},
      {"rename invariance", rename_invariance},
      {"planted-pair detection", planted_pair},
      {"analytics oracles", analytics_oracles},
      {"desk-scale throughput", throughput},
      {"export round trip", export_round_trip},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.name << ": " << o.detail << std::endl;
  }
  std::cout << (sizeof criteria / sizeof criteria[0]) - failed << "/" << sizeof criteria / sizeof criteria[0]
            << " criteria met\n";
  return failed;
}
