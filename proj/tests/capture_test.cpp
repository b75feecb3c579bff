#include <gtest/gtest.h>

#include <fstream>

#include "codetrail/capture/capture_session.hpp"
#include "codetrail/capture/delivery.hpp"
#include "codetrail/capture/glob.hpp"
#include "codetrail/capture/spool.hpp"
#include "codetrail/capture/watch_config.hpp"
#include "codetrail/event/diff.hpp"
#include "codetrail/store/replay.hpp"
#include "support.hpp"

using namespace codetrail;
using namespace codetrail::capture;
using namespace codetrail::testing;

namespace {

SpoolOptions fast_spool(std::uint64_t max_bytes = 256ull << 20) { return {max_bytes, false}; }

struct Workspace {
  TempDir dir;
  WatchConfig config;
  ManualClock clock;

  Workspace() {
    std::filesystem::create_directories(dir / "ws");
    config.workspace_root = dir / "ws";
    config.spool_dir = dir / "spool";
    config.actor_id = "alice";
    config.workspace_id = "ws-1";
    config.exercise_id = "lab1";
    config.debounce_ms = 1000;
  }
  void put(const std::string& rel, const std::string& text) { write_file(config.workspace_root / rel, text); }
};

std::vector<EventKind> kinds(const std::vector<Event>& events) {
  std::vector<EventKind> out;
  for (const auto& e : events) out.push_back(e.kind);
  return out;
}

}  // namespace

TEST(Glob, SegmentRules) {
  EXPECT_TRUE(glob_match("*.c", "main.c"));
  EXPECT_TRUE(glob_match("*.c", "src/deep/main.c"));
  EXPECT_FALSE(glob_match("src/*.c", "src/deep/main.c"));
  EXPECT_TRUE(glob_match("src/**/*.c", "src/deep/main.c"));
  EXPECT_TRUE(glob_match("src/**/*.c", "src/main.c"));
  EXPECT_TRUE(glob_match("**", "a/b/c"));
  EXPECT_TRUE(glob_match("?.h", "x.h"));
  EXPECT_FALSE(glob_match("?.h", "xy.h"));
  EXPECT_TRUE(glob_match(".git/**", ".git/objects/ab"));
  EXPECT_TRUE(glob_excludes_dir(".git/**", ".git"));
  EXPECT_TRUE(glob_excludes_dir("build/**", "build"));
  EXPECT_FALSE(glob_excludes_dir("*.o", "build"));
  EXPECT_TRUE(any_match(default_exclude_globs(), ".git/HEAD"));
}

TEST(WatchConfig, ParsesKeyValueText) {
  const auto c = WatchConfig::parse(
      "# comment\nworkspace_root = ws\nactor_id = s-1\nworkspace_id = w\nexercise_id = lab\n"
      "include_globs = *.c, *.h\ndebounce_ms = 1500\nspool_dir = /tmp/sp\n",
      "/base");
  EXPECT_EQ(c.workspace_root, std::filesystem::path("/base/ws"));
  EXPECT_EQ(c.spool_dir, std::filesystem::path("/tmp/sp"));
  EXPECT_EQ(c.include_globs, (std::vector<std::string>{"*.c", "*.h"}));
  EXPECT_EQ(c.debounce_ms, 1500);
  EXPECT_EQ(c.exercise_id, "lab");
  EXPECT_THROW(WatchConfig::parse("bogus = 1\n"), Error);
  EXPECT_THROW(WatchConfig::parse("debounce_ms = fast\n"), Error);
  EXPECT_THROW(WatchConfig::parse("no equals sign\n"), Error);
}

TEST(WatchConfig, CheckEnforcesInvariants) {
  Workspace w;
  EXPECT_NO_THROW(w.config.check());
  auto c = w.config;
  c.debounce_ms = 10;
  EXPECT_THROW(c.check(), Error);
  c = w.config;
  c.actor_id = "Not Valid";
  EXPECT_THROW(c.check(), Error);
  c = w.config;
  c.workspace_root = w.dir / "nope";
  EXPECT_THROW(c.check(), Error);
}

TEST(Spool, PersistsAndAcksAcrossReopen) {
  TempDir dir;
  std::vector<Event> events;
  for (int i = 0; i < 5; ++i) events.push_back(make("alice", i, HeartbeatPayload{}));
  {
    Spool spool(dir.path(), fast_spool());
    for (const auto& e : events) spool.append(e, at(0));
    EXPECT_EQ(spool.pending_count(), 5u);
    spool.ack_through(2);
    spool.ack_through(1);  // never goes backwards
    EXPECT_EQ(spool.acked_count(), 2u);
  }
  Spool spool(dir.path(), fast_spool());
  EXPECT_EQ(spool.total_count(), 5u);
  EXPECT_EQ(spool.acked_count(), 2u);
  EXPECT_EQ(read_ack_offset(dir.path()), 2u);
  const auto pending = spool.pending(10);
  ASSERT_EQ(pending.size(), 3u);
  EXPECT_EQ(pending[0].event, events[2]);
  EXPECT_EQ(pending[0].index, 2u);
  const auto all = spool.read_all();
  ASSERT_EQ(all.size(), 5u);
  EXPECT_EQ(all[1].delivery_state, DeliveryState::Acked);
  EXPECT_EQ(all[3].delivery_state, DeliveryState::Pending);
}

TEST(Spool, TornTailIsDropped) {
  TempDir dir;
  {
    Spool spool(dir.path(), fast_spool());
    spool.append(make("alice", 0, HeartbeatPayload{}), at(0));
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir.path()))
    if (entry.path().extension() == ".ndjson") {
      std::ofstream out(entry.path(), std::ios::app);
      out << "{\"event\":{";
    }
  Spool spool(dir.path(), fast_spool());
  EXPECT_EQ(spool.total_count(), 1u);
  spool.append(make("alice", 1, HeartbeatPayload{}), at(1));
  Spool again(dir.path(), fast_spool());
  EXPECT_EQ(again.total_count(), 2u);
}

TEST(Spool, FullAndReadOnlyAreReported) {
  TempDir dir;
  Spool small(dir / "small", fast_spool(600));
  try {
    for (int i = 0; i < 100; ++i) small.append(make("alice", i, HeartbeatPayload{}), at(0));
    FAIL() << "expected SpoolFull";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::SpoolFull);
  }
  Spool ro(dir / "ro", fast_spool());
  std::filesystem::permissions(dir / "ro", std::filesystem::perms::owner_write, std::filesystem::perm_options::remove);
  try {
    ro.append(make("alice", 0, HeartbeatPayload{}), at(0));
    FAIL() << "expected DiskError";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::DiskError);
  }
  std::filesystem::permissions(dir / "ro", std::filesystem::perms::owner_write, std::filesystem::perm_options::add);
}

TEST(CaptureSession, FirstSightIsASnapshot) {
  Workspace w;
  w.put("main.c", "int main() {}\n");
  w.put(".git/HEAD", "ref\n");
  w.put("build/out.o", "bin\n");
  Spool spool(w.config.spool_dir, fast_spool());
  CaptureSession session(w.config, spool, w.clock);
  const auto events = session.tick();
  ASSERT_EQ(events.size(), 1u);
  const auto* snap = events[0].as<FileSnapshotPayload>();
  ASSERT_TRUE(snap);
  EXPECT_EQ(snap->file, "main.c");
  EXPECT_EQ(snap->content, "int main() {}\n");
  EXPECT_EQ(snap->line_count, 1u);
  EXPECT_EQ(events[0].actor_id, "alice");
  EXPECT_EQ(events[0].exercise_id, "lab1");
  EXPECT_EQ(spool.total_count(), 1u);
}

TEST(CaptureSession, EditsInsideTheDebounceWindowCoalesce) {
  Workspace w;
  w.put("a.c", "one\n");
  Spool spool(w.config.spool_dir, fast_spool());
  CaptureSession session(w.config, spool, w.clock);
  session.tick();
  w.put("a.c", "one\ntwo\n");
  w.clock.advance(200);
  EXPECT_TRUE(session.tick().empty());
  w.put("a.c", "one\ntwo\nthree\n");
  w.clock.advance(500);
  EXPECT_TRUE(session.tick().empty());
  w.clock.advance(1100);
  const auto events = session.tick();
  ASSERT_EQ(kinds(events), (std::vector<EventKind>{EventKind::FileDiff, EventKind::FileSave}));
  const auto* diff = events[0].as<FileDiffPayload>();
  EXPECT_EQ(apply_diff("one\n", diff->hunks), "one\ntwo\nthree\n");
  const auto* save = events[1].as<FileSavePayload>();
  EXPECT_EQ(save->content_sha256, sha256_hex("one\ntwo\nthree\n"));
  EXPECT_EQ(save->line_count, 3u);
  EXPECT_EQ(session.emitted_text("a.c"), "one\ntwo\nthree\n");
}

TEST(CaptureSession, ChainReplaysToDiskContent) {
  Workspace w;
  w.put("a.c", "x\n");
  Spool spool(w.config.spool_dir, fast_spool());
  w.config.snapshot_every = 3;
  CaptureSession session(w.config, spool, w.clock);
  std::vector<Event> all = session.tick();
  std::mt19937_64 rng(5);
  std::string text = "x\n";
  int snapshots = 0;
  for (int i = 0; i < 10; ++i) {
    text = random_edit(rng, text) + "\nend" + std::to_string(i) + "\n";
    w.put("a.c", text);
    w.clock.advance(10);
    EXPECT_TRUE(session.tick().empty());
    w.clock.advance(1500);
    for (auto& e : session.tick()) {
      snapshots += e.kind == EventKind::FileSnapshot;
      all.push_back(e);
    }
  }
  EXPECT_EQ(snapshots, 3);  // after diffs 3, 6 and 9
  const auto s = stored(all);
  EXPECT_EQ(store::reconstruct_file(s, "alice", "ws-1", "a.c", s.back().seq), text);
  for (const auto& e : all) EXPECT_TRUE(validate(e).empty());
}

TEST(CaptureSession, DeletionAndNewFiles) {
  Workspace w;
  w.put("a.c", "gone\n");
  Spool spool(w.config.spool_dir, fast_spool());
  CaptureSession session(w.config, spool, w.clock);
  session.tick();
  std::filesystem::remove(w.config.workspace_root / "a.c");
  w.put("b.c", "new\n");
  w.clock.advance(100);
  auto events = session.tick();
  ASSERT_EQ(kinds(events), std::vector<EventKind>{EventKind::FileSnapshot});
  EXPECT_EQ(events[0].as<FileSnapshotPayload>()->file, "b.c");
  w.clock.advance(1500);
  events = session.tick();
  ASSERT_EQ(kinds(events), std::vector<EventKind>{EventKind::FileDiff});
  EXPECT_EQ(apply_diff("gone\n", events[0].as<FileDiffPayload>()->hunks), "");
}

TEST(CaptureSession, SkipsBinaryAndOversizedFiles) {
  Workspace w;
  w.put("bin.dat", std::string("a\0b", 3));
  w.put("latin.txt", "caf\xe9\n");
  w.put("big.txt", std::string(2000, 'x'));
  w.put("ok.txt", "fine\r\nline\r\n");
  w.config.max_file_bytes = 1000;
  Spool spool(w.config.spool_dir, fast_spool());
  CaptureSession session(w.config, spool, w.clock);
  const auto events = session.tick();
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].as<FileSnapshotPayload>()->content, "fine\nline\n");
}

TEST(CaptureSession, ContinuousEditingStillEmits) {
  Workspace w;
  w.put("a.c", "0\n");
  Spool spool(w.config.spool_dir, fast_spool());
  CaptureSession session(w.config, spool, w.clock);
  session.tick();
  int diffs = 0;
  for (int i = 1; i <= 30; ++i) {
    w.put("a.c", std::to_string(i) + "\n");
    w.clock.advance(300);
    for (const auto& e : session.tick()) diffs += e.kind == EventKind::FileDiff;
  }
  EXPECT_GE(diffs, 1);
}

TEST(CaptureSession, HeartbeatsFollowTheInterval) {
  Workspace w;
  w.config.heartbeat_ms = 60000;
  Spool spool(w.config.spool_dir, fast_spool());
  CaptureSession session(w.config, spool, w.clock);
  EXPECT_TRUE(session.tick().empty());
  w.clock.advance(59000);
  EXPECT_TRUE(session.tick().empty());
  w.clock.advance(1000);
  EXPECT_EQ(kinds(session.tick()), std::vector<EventKind>{EventKind::Heartbeat});
}

TEST(CaptureSession, InboxDropsBecomeEvents) {
  Workspace w;
  Spool spool(w.config.spool_dir, fast_spool());
  CaptureSession session(w.config, spool, w.clock);
  write_file(w.config.spool_dir / "inbox" / "001.json",
             R"({"kind":"Diagnostic","payload":{"level":"Error","message":"boom","file":"a.c","line":3,"source":"gcc"},"client_ts":"2025-03-01T14:00:01.000Z"})");
  write_file(w.config.spool_dir / "inbox" / "002.json", R"({"kind":"FileDiff","payload":{}})");
  const auto events = session.tick();
  ASSERT_EQ(kinds(events), std::vector<EventKind>{EventKind::Diagnostic});
  EXPECT_EQ(events[0].client_ts, Timestamp::parse("2025-03-01T14:00:01.000Z"));
  EXPECT_FALSE(std::filesystem::exists(w.config.spool_dir / "inbox" / "001.json"));
  EXPECT_TRUE(std::filesystem::exists(w.config.spool_dir / "inbox" / "rejected" / "002.json"));

  const Event pushed = session.record(RunStartPayload{"r1", "make"});
  EXPECT_EQ(pushed.kind, EventKind::RunStart);
  EXPECT_THROW(session.record(FileSavePayload{"a.c", std::string(64, 'a'), 1}), Error);
}

TEST(CaptureSession, ExtensionMarkerClaimsTheWorkspace) {
  Workspace w;
  w.put(kExtensionMarker, "");
  Spool spool(w.config.spool_dir, fast_spool());
  try {
    CaptureSession session(w.config, spool, w.clock);
    FAIL() << "expected WorkspaceClaimed";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::WorkspaceClaimed);
  }
}

TEST(CaptureSession, SpoolInsideWorkspaceIsIgnored) {
  Workspace w;
  w.config.spool_dir = w.config.workspace_root / ".spool";
  w.put("a.c", "x\n");
  Spool spool(w.config.spool_dir, fast_spool());
  CaptureSession session(w.config, spool, w.clock);
  EXPECT_EQ(session.tick().size(), 1u);
  w.clock.advance(5000);
  EXPECT_TRUE(session.tick().empty());
}

TEST(CaptureSession, BuffersWhileTheSpoolIsFull) {
  Workspace w;
  w.put("a.c", "x\n");
  Spool spool(w.config.spool_dir, fast_spool(10));
  CaptureSession session(w.config, spool, w.clock);
  session.tick();
  EXPECT_EQ(session.buffered_events(), 1u);
  EXPECT_TRUE(session.last_spool_error());
  EXPECT_EQ(spool.total_count(), 0u);
}

class DeliveryFixture : public ::testing::Test {
 protected:
  DeliveryFixture()
      : store_(dir_ / "store", store::StoreOptions{4096, false}),
        ingest_(store_, store::Roster::parse("tok alice\n")),
        spool_(dir_ / "spool", fast_spool()),
        transport_(ingest_) {
    options_.token = "tok";
    options_.retry = no_sleep_retry();
  }
  void enqueue(int n, int offset = 0) {
    for (int i = 0; i < n; ++i) spool_.append(make("alice", offset + i, HeartbeatPayload{}), at(0));
  }

  TempDir dir_;
  store::EventStore store_;
  store::IngestService ingest_;
  Spool spool_;
  LoopbackTransport transport_;
  FlushOptions options_;
};

TEST_F(DeliveryFixture, EmptySpoolSendsNothing) {
  const auto r = flush(spool_, transport_, options_);
  EXPECT_EQ(r.sent, 0u);
  EXPECT_EQ(transport_.calls, 0);
  EXPECT_EQ(r.status, DeliveryStatus::Ok);
}

TEST_F(DeliveryFixture, DeliversEverythingOnce) {
  enqueue(10);
  options_.batch_size = 4;
  auto r = flush(spool_, transport_, options_);
  EXPECT_EQ(r.sent, 10u);
  EXPECT_EQ(r.acked, 10u);
  EXPECT_EQ(transport_.calls, 3);
  EXPECT_EQ(store_.size(), 10u);
  EXPECT_EQ(spool_.pending_count(), 0u);
  r = flush(spool_, transport_, options_);
  EXPECT_EQ(r.sent, 0u);
  EXPECT_EQ(transport_.calls, 3);
}

TEST_F(DeliveryFixture, LostResponseIsResentAndDeduplicated) {
  enqueue(5);
  transport_.after = [](const TransportResponse&) { return TransportResponse{0, "", "connection reset"}; };
  options_.retry = no_sleep_retry(2);
  auto r = flush(spool_, transport_, options_);
  EXPECT_EQ(r.status, DeliveryStatus::ServerUnavailable);
  EXPECT_EQ(spool_.pending_count(), 5u);
  EXPECT_EQ(store_.size(), 5u);  // the server did store them
  transport_.after = nullptr;
  r = flush(spool_, transport_, options_);
  EXPECT_EQ(r.status, DeliveryStatus::Ok);
  EXPECT_EQ(spool_.pending_count(), 0u);
  EXPECT_EQ(store_.size(), 5u);
}

TEST_F(DeliveryFixture, TransientFailuresAreRetried) {
  enqueue(3);
  int failures = 2;
  transport_.before = [&](const std::string&) -> std::optional<TransportResponse> {
    if (failures-- > 0) return TransportResponse{503, "busy", {}};
    return std::nullopt;
  };
  std::vector<std::int64_t> sleeps;
  options_.retry.sleep = [&](std::int64_t ms) { sleeps.push_back(ms); };
  const auto r = flush(spool_, transport_, options_);
  EXPECT_EQ(r.status, DeliveryStatus::Ok);
  EXPECT_EQ(store_.size(), 3u);
  ASSERT_EQ(sleeps.size(), 2u);
  EXPECT_GE(sleeps[0], 125);
  EXPECT_LE(sleeps[0], 250);
  EXPECT_GE(sleeps[1], 250);
  EXPECT_LE(sleeps[1], 500);
}

TEST_F(DeliveryFixture, BadTokenStopsDelivery) {
  enqueue(3);
  options_.token = "wrong";
  const auto r = flush(spool_, transport_, options_);
  EXPECT_EQ(r.status, DeliveryStatus::AuthRejected);
  EXPECT_EQ(transport_.calls, 1);
  EXPECT_EQ(spool_.pending_count(), 3u);
}

TEST_F(DeliveryFixture, InvalidEntriesAreDeadLettered) {
  enqueue(2);
  spool_.append(make("bob", 0, HeartbeatPayload{}), at(0));  // outside the token's scope
  enqueue(2, 10);
  const auto r = flush(spool_, transport_, options_);
  EXPECT_EQ(r.status, DeliveryStatus::Ok);
  EXPECT_EQ(r.rejected, 1u);
  EXPECT_EQ(r.acked, 4u);
  EXPECT_EQ(spool_.pending_count(), 0u);
  EXPECT_EQ(store_.size(), 4u);
  EXPECT_TRUE(std::filesystem::exists(spool_.dir() / "rejected.ndjson"));
}

TEST_F(DeliveryFixture, OversizedBatchesAreSplit) {
  enqueue(8);
  transport_.before = [](const std::string& body) -> std::optional<TransportResponse> {
    if (std::count(body.begin(), body.end(), '\n') > 2) return TransportResponse{413, "too big", {}};
    return std::nullopt;
  };
  const auto r = flush(spool_, transport_, options_);
  EXPECT_EQ(r.status, DeliveryStatus::Ok);
  EXPECT_EQ(store_.size(), 8u);
  EXPECT_EQ(spool_.pending_count(), 0u);
}

TEST_F(DeliveryFixture, PartialReceiptAcksOnlyTheNamedPrefix) {
  enqueue(4);
  transport_.after = [](const TransportResponse& real) {
    json receipt = json::parse(real.body);
    receipt["accepted"].erase(receipt["accepted"].begin() + 2, receipt["accepted"].end());
    return TransportResponse{200, receipt.dump(), {}};
  };
  const auto r = flush(spool_, transport_, options_);
  EXPECT_EQ(r.status, DeliveryStatus::PartialAccept);
  EXPECT_EQ(spool_.acked_count(), 2u);
}

TEST(RetryPolicy, NominalDelayIsCappedExponential) {
  RetryPolicy p;
  EXPECT_EQ(p.nominal_delay(0), 250);
  EXPECT_EQ(p.nominal_delay(1), 500);
  EXPECT_EQ(p.nominal_delay(3), 2000);
  EXPECT_EQ(p.nominal_delay(20), 30000);
}
