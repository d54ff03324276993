#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "pacer/schedule.hpp"

using namespace pacer;

namespace {

// epsilon 100, delta 500
PacerConfig small_cfg() { return PacerConfig::make(TimeNs(100), TimeNs(30), TimeNs(400), 38, 1500, 1448, 2); }

ScheduleDb small_db(const PacerConfig& c) {
  ScheduleDb db;
  db.add({kDefaultSid, c.delta, TimeNs(100), 3}, c);
  db.add({1, c.delta + TimeNs(50), TimeNs(70), 4}, c);
  db.add({2, c.delta, TimeNs(10), 2}, c);
  return db;
}

TransmitSchedule raw(std::vector<std::int64_t> slots, std::size_t cursor = 0, std::int64_t spacing = 100) {
  TransmitSchedule s;
  s.sid = kDefaultSid;
  for (auto x : slots) s.slots.push_back(TimeNs(x));
  s.cursor = cursor;
  s.spacing = TimeNs(spacing);
  return s;
}

ScheduleUpdate upd(std::int64_t tu, UpdateEvent ev, std::int64_t te) {
  return {TimeNs(tu), ev, TimeNs(te), std::nullopt};
}

std::vector<std::int64_t> ints(const std::vector<TimeNs>& v) {
  std::vector<std::int64_t> out;
  for (auto t : v) out.push_back(t.count());
  return out;
}

// Independent restriction: slots <= t, skipping those a pause holds back.
std::vector<std::int64_t> restriction(const TransmitSchedule& s, std::int64_t t) {
  std::vector<std::int64_t> out;
  for (std::size_t k = 0; k < s.slots.size(); ++k) {
    const auto x = s.slots[k].count();
    const bool held = s.paused_from && x > s.paused_from->count();
    if (x <= t && !held) out.push_back(x);
  }
  return out;
}

}  // namespace

TEST_CASE("instantiate_default anchors at arrival") {
  const auto c = small_cfg();
  const auto db = small_db(c);
  auto s = instantiate_default(db, TimeNs(0), c);
  CHECK(ints(s.slots) == std::vector<std::int64_t>{500, 600, 700});
  CHECK(s.anchor.count() == 0);
  auto t = instantiate_default(db, TimeNs(1000), c);
  CHECK(ints(t.slots) == std::vector<std::int64_t>{1500, 1600, 1700});
  CHECK(ints(t.offsets()) == ints(s.offsets()));
}

TEST_CASE("templates firing before delta are rejected at load") {
  const auto c = small_cfg();
  ScheduleDb db;
  CHECK_THROWS_AS(db.add({kDefaultSid, c.delta - TimeNs(1), TimeNs(100), 3}, c), TemplateTooEager);
  CHECK_NOTHROW(db.add({kDefaultSid, c.delta, TimeNs(100), 3}, c));
  std::stringstream eager("0,499,100,3\n");
  CHECK_THROWS_AS(ScheduleDb::load(eager, c), ParseError);
  std::stringstream ok("0,500,100,3\n7,900,50,2\n");
  const auto loaded = ScheduleDb::load(ok, c);
  CHECK(loaded.sids() == std::vector<int>{0, 7});
  std::stringstream no_default("7,900,50,2\n");
  CHECK_THROWS_AS(ScheduleDb::load(no_default, c), ConfigError);
}

TEST_CASE("apply_update: pause keeps earlier slots") {
  const auto c = small_cfg();
  const auto db = small_db(c);
  const auto s = apply_update(raw({400, 600, 800}), upd(0, UpdateEvent::pause(), 500), db, c);
  CHECK(ints(s.fires_upto(TimeNs(10000))) == std::vector<std::int64_t>{400});
  CHECK(ints(s.slots) == std::vector<std::int64_t>{400, 600, 800});
}

TEST_CASE("apply_update: resume shifts by the paused time rounded to an epoch") {
  const auto c = small_cfg();
  const auto db = small_db(c);
  auto s = apply_update(raw({400, 600, 800}), upd(0, UpdateEvent::pause(), 500), db, c);
  s = apply_update(s, upd(0, UpdateEvent::resume(), 730), db, c);
  CHECK_FALSE(s.paused());
  CHECK(ints(s.slots) == std::vector<std::int64_t>{400, 900, 1100});
  CHECK(s.pause_shift.count() == 300);
}

TEST_CASE("apply_update: extend one") {
  const auto c = small_cfg();
  const auto db = small_db(c);
  const auto s = apply_update(raw({100, 200, 300}), upd(0, UpdateEvent::extend_one(), 250), db, c);
  CHECK(ints(s.slots) == std::vector<std::int64_t>{100, 200, 300, 400});
  // A late extension waits for its effective time.
  const auto late = apply_update(raw({100, 200, 300}), upd(0, UpdateEvent::extend_one(), 950), db, c);
  CHECK(late.slots.back().count() == 950);
}

TEST_CASE("apply_update: replace before a fired slot is a prefix violation") {
  const auto c = small_cfg();
  const auto db = small_db(c);
  const auto fired = raw({600, 700, 800}, 2);
  CHECK_THROWS_AS(apply_update(fired, upd(0, UpdateEvent::replace(2), 650), db, c), PrefixViolation);
  CHECK_THROWS_AS(apply_update(fired, upd(0, UpdateEvent::pause(), 650), db, c), PrefixViolation);
  const auto ok = apply_update(fired, upd(0, UpdateEvent::replace(2), 750), db, c);
  CHECK(ints(ok.slots) == std::vector<std::int64_t>{600, 700, 750, 760});
}

TEST_CASE("install merges, replace drops pending slots") {
  const auto c = small_cfg();
  const auto db = small_db(c);
  const auto base = raw({600, 700, 800});
  const auto ins = apply_update(base, upd(0, UpdateEvent::install(2), 750), db, c);
  CHECK(ints(ins.slots) == std::vector<std::int64_t>{600, 700, 750, 760, 800});
  CHECK(ins.anchor.count() == 250);
  CHECK(ins.sid == 2);
  const auto rep = apply_update(base, upd(0, UpdateEvent::replace(2), 750), db, c);
  CHECK(ints(rep.slots) == std::vector<std::int64_t>{600, 700, 750, 760});
}

TEST_CASE("property: successful updates preserve the restriction below Te") {
  const auto c = small_cfg();
  const auto db = small_db(c);
  std::mt19937_64 rng(20261016);
  int applied = 0, rejected = 0;
  for (int iter = 0; iter < 3000; ++iter) {
    TransmitSchedule s = instantiate_default(db, TimeNs(static_cast<std::int64_t>(rng() % 2000)), c);
    // random history: a few prior updates, some fired slots
    for (int j = 0, m = static_cast<int>(rng() % 3); j < m; ++j) {
      const std::int64_t te = 500 + static_cast<std::int64_t>(rng() % 3000);
      const UpdateKind kinds[] = {UpdateKind::install, UpdateKind::pause, UpdateKind::resume,
                                  UpdateKind::extend_one, UpdateKind::replace};
      UpdateEvent ev{kinds[rng() % 5], static_cast<int>(rng() % 3)};
      try {
        s = apply_update(s, upd(0, ev, te), db, c);
      } catch (const PrefixViolation&) {
      }
    }
    s.cursor = rng() % (s.slots.size() + 1);
    for (std::size_t k = 0; k < s.cursor; ++k)
      if (s.blocked(k)) s.cursor = k;
    const std::int64_t te = 500 + static_cast<std::int64_t>(rng() % 4000);
    const UpdateKind kinds[] = {UpdateKind::install, UpdateKind::pause, UpdateKind::resume,
                                UpdateKind::extend_one, UpdateKind::replace};
    const UpdateEvent ev{kinds[rng() % 5], static_cast<int>(rng() % 3)};
    try {
      const auto t = apply_update(s, upd(0, ev, te), db, c);
      ++applied;
      for (std::int64_t probe = 0; probe < te; probe += 7) {
        REQUIRE(restriction(s, probe) == restriction(t, probe));
      }
      for (std::size_t k = 0; k < s.cursor; ++k) REQUIRE(t.slots[k] == s.slots[k]);
      REQUIRE(std::is_sorted(t.slots.begin(), t.slots.end()));
      REQUIRE(std::adjacent_find(t.slots.begin(), t.slots.end()) == t.slots.end());
    } catch (const PrefixViolation&) {
      ++rejected;
      // only possible when a fired slot sits at or after Te
      REQUIRE(s.cursor > 0);
      REQUIRE(s.slots[s.cursor - 1].count() >= te);
    }
  }
  CHECK(applied > 1000);
  CHECK(rejected > 0);
}

TEST_CASE("enqueue_update ordering") {
  UpdateQueue q;
  enqueue_update(q, FlowId(1), upd(10, UpdateEvent::pause(), 50));
  CHECK(q.of(FlowId(1)).size() == 1);
  CHECK(q.temax->count() == 50);
  CHECK_THROWS_AS(enqueue_update(q, FlowId(1), upd(10, UpdateEvent::pause(), 40)), OrderingViolation);
  CHECK_THROWS_AS(enqueue_update(q, FlowId(2), upd(10, UpdateEvent::pause(), 50)), OrderingViolation);
  CHECK_THROWS_AS(enqueue_update(q, FlowId(1), upd(90, UpdateEvent::pause(), 80)), OrderingViolation);

  UpdateQueue r;
  for (std::int64_t te : {50, 60, 70}) enqueue_update(r, FlowId(1), upd(0, UpdateEvent::pause(), te));
  CHECK(r.temax->count() == 70);
  CHECK(holds_i1(r));
  CHECK(holds_i2(r));
}

TEST_CASE("property: enqueue keeps every flow list Te-sorted and temax at the max") {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 200; ++iter) {
    UpdateQueue q;
    std::vector<std::int64_t> all;
    std::int64_t te = 0;
    for (int j = 0; j < 40; ++j) {
      te += 1 + static_cast<std::int64_t>(rng() % 50);
      const std::int64_t tu = te - static_cast<std::int64_t>(rng() % (te + 1));
      enqueue_update(q, FlowId(1 + static_cast<std::uint32_t>(rng() % 3)), upd(tu, UpdateEvent::pause(), te));
      all.push_back(te);
    }
    for (const auto& [f, u] : q.per_flow) {
      auto copy = u;
      std::stable_sort(copy.begin(), copy.end(),
                       [](const auto& a, const auto& b) { return a.effective_at < b.effective_at; });
      REQUIRE(copy == u);
    }
    REQUIRE(q.temax->count() == *std::max_element(all.begin(), all.end()));
    REQUIRE(holds_i1(q));
    REQUIRE(holds_i2(q));
  }
}

TEST_CASE("update_prof splits at the first Tu beyond now") {
  const auto c = small_cfg();
  const auto db = small_db(c);
  const auto s = raw({600, 700, 800});
  const std::vector<ScheduleUpdate> u{upd(10, UpdateEvent::extend_one(), 200),
                                      upd(150, UpdateEvent::extend_one(), 300)};
  auto [t, rest] = update_prof(s, u, TimeNs(100), db, c);
  CHECK(t.slots.size() == 4);
  REQUIRE(rest.size() == 1);
  CHECK(rest[0] == u[1]);

  auto [t0, rest0] = update_prof(s, u, TimeNs(5), db, c);
  CHECK(t0 == s);
  CHECK(rest0 == u);

  // Tu order does not matter, the split is positional.
  const std::vector<ScheduleUpdate> v{upd(150, UpdateEvent::extend_one(), 200),
                                      upd(10, UpdateEvent::extend_one(), 300)};
  auto [t1, rest1] = update_prof(s, v, TimeNs(100), db, c);
  CHECK(t1 == s);
  CHECK(rest1.size() == 2);
}

TEST_CASE("property: update_prof equals a fold and composes") {
  const auto c = small_cfg();
  const auto db = small_db(c);
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 500; ++iter) {
    const auto s = instantiate_default(db, TimeNs(static_cast<std::int64_t>(rng() % 500)), c);
    std::vector<ScheduleUpdate> u;
    std::int64_t te = 1000;
    for (int j = 0, m = 1 + static_cast<int>(rng() % 6); j < m; ++j) {
      te += 1 + static_cast<std::int64_t>(rng() % 400);
      const UpdateKind kinds[] = {UpdateKind::install, UpdateKind::pause, UpdateKind::resume,
                                  UpdateKind::extend_one, UpdateKind::replace};
      u.push_back(upd(te - static_cast<std::int64_t>(rng() % 600), {kinds[rng() % 5], static_cast<int>(rng() % 3)}, te));
    }
    auto fold = s;
    for (const auto& x : u) fold = apply_update(fold, x, db, c);
    auto [all, none] = update_prof(s, u, TimeNs(1'000'000), db, c);
    REQUIRE(all == fold);
    REQUIRE(none.empty());

    const TimeNs now(static_cast<std::int64_t>(rng() % 4000));
    const TimeNs later = now + TimeNs(static_cast<std::int64_t>(rng() % 4000));
    auto [a, ra] = update_prof(s, u, now, db, c);
    auto [b, rb] = update_prof(a, ra, later, db, c);
    auto [d, rd] = update_prof(s, u, later, db, c);
    REQUIRE(b == d);
    REQUIRE(rb == rd);
  }
}
