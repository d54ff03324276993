#include "pacer/schedule.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace pacer {

std::vector<TimeNs> ScheduleTemplate::offsets() const {
  std::vector<TimeNs> out;
  out.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) out.push_back(initial_delay + spacing * k);
  return out;
}

void ScheduleDb::add(int sid, std::vector<TimeNs> offsets, TimeNs spacing, const PacerConfig& cfg) {
  if (sid < 0) throw ConfigError("sid must be non-negative");
  if (offsets.empty()) throw ConfigError("schedule " + std::to_string(sid) + " has no slots");
  if (offsets.front() < cfg.delta)
    throw TemplateTooEager("schedule " + std::to_string(sid) + " first offset " +
                           std::to_string(offsets.front().count()) + " < delta " +
                           std::to_string(cfg.delta.count()));
  if (std::adjacent_find(offsets.begin(), offsets.end(), std::greater_equal<>()) != offsets.end())
    throw ConfigError("schedule " + std::to_string(sid) + " offsets not strictly ascending");
  if (spacing.count() == 0) spacing = cfg.epsilon;
  entries_[sid] = Entry{std::move(offsets), spacing};
}

void ScheduleDb::add(const ScheduleTemplate& t, const PacerConfig& cfg) {
  if (t.count < 1) throw ConfigError("schedule " + std::to_string(t.sid) + " count < 1");
  if (t.count > 1 && t.spacing.count() == 0)
    throw ConfigError("schedule " + std::to_string(t.sid) + " has zero spacing");
  add(t.sid, t.offsets(), t.spacing, cfg);
}

const ScheduleDb::Entry& ScheduleDb::at(int sid) const {
  auto it = entries_.find(sid);
  if (it == entries_.end()) throw ConfigError("unknown sid " + std::to_string(sid));
  return it->second;
}

std::vector<int> ScheduleDb::sids() const {
  std::vector<int> out;
  for (const auto& [sid, e] : entries_) out.push_back(sid);
  return out;
}

ScheduleDb ScheduleDb::standard(const PacerConfig& cfg) {
  ScheduleDb db;
  const TimeNs e = cfg.epsilon;
  db.add({kDefaultSid, cfg.delta, e * 2, 20}, cfg);
  db.add({1, cfg.delta + e * 8, e, 40}, cfg);
  db.add({2, cfg.delta, e * 3, 10}, cfg);
  return db;
}

ScheduleDb ScheduleDb::load(std::istream& is, const PacerConfig& cfg) {
  ScheduleDb db;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    long long sid = 0, init = 0, spacing = 0, count = 0;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ls >> sid >> c1 >> init >> c2 >> spacing >> c3 >> count) || c1 != ',' || c2 != ',' ||
        c3 != ',' || sid < 0 || init < 0 || spacing < 0 || count < 1)
      throw ParseError(n, "expected sid,initial_delay_ns,spacing_ns,count");
    try {
      db.add({static_cast<int>(sid), TimeNs(init), TimeNs(spacing),
              static_cast<std::uint32_t>(count)},
             cfg);
    } catch (const PacerError& e) {
      throw ParseError(n, e.what());
    }
  }
  if (!db.contains(kDefaultSid)) throw ConfigError("schedule db lacks the default sid 0");
  return db;
}

void write_schedule_db(std::ostream& os, const std::vector<ScheduleTemplate>& templates) {
  for (const auto& t : templates)
    os << t.sid << ',' << t.initial_delay.count() << ',' << t.spacing.count() << ',' << t.count
       << '\n';
}

std::vector<UpdateProjection> project(const std::vector<ScheduleUpdate>& u) {
  std::vector<UpdateProjection> out;
  out.reserve(u.size());
  for (const auto& x : u) out.push_back({x.event, x.effective_at});
  return out;
}

std::vector<TimeNs> TransmitSchedule::offsets() const {
  std::vector<TimeNs> out;
  for (auto s : slots)
    if (s >= anchor) out.push_back(s - anchor);
  return out;
}

std::vector<TimeNs> TransmitSchedule::fires_upto(TimeNs t) const {
  std::vector<TimeNs> out;
  for (std::size_t k = 0; k < slots.size() && slots[k] <= t; ++k)
    if (!blocked(k)) out.push_back(slots[k]);
  return out;
}

TransmitSchedule instantiate_default(const ScheduleDb& db, TimeNs arrival, const PacerConfig& cfg) {
  const auto& e = db.at(kDefaultSid);
  if (e.offsets.front() < cfg.delta) throw TemplateTooEager("default template fires before delta");
  TransmitSchedule s;
  s.sid = kDefaultSid;
  s.anchor = arrival;
  s.spacing = e.spacing;
  for (auto off : e.offsets) s.slots.push_back(arrival + off);
  return s;
}

namespace {

void splice_template(TransmitSchedule& s, int sid, TimeNs te, bool keep_pending,
                     const ScheduleDb& db, const PacerConfig& cfg) {
  const auto& e = db.at(sid);
  if (te < cfg.delta) throw TimeError("effective time precedes delta; cannot anchor template");
  const TimeNs anchor = te - cfg.delta;
  std::vector<TimeNs> merged;
  for (auto t : s.slots)
    if (t < te || keep_pending) merged.push_back(t);
  for (auto off : e.offsets) merged.push_back(anchor + off);
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  s.slots = std::move(merged);
  s.sid = sid;
  s.anchor = anchor;
  s.spacing = e.spacing;
}

}  // namespace

TransmitSchedule apply_update(const TransmitSchedule& sched, const ScheduleUpdate& upd,
                              const ScheduleDb& db, const PacerConfig& cfg) {
  if (upd.queued_at > upd.effective_at) throw OrderingViolation("update with Tu > Te");
  const TimeNs te = upd.effective_at;
  TransmitSchedule s = sched;
  switch (upd.event.kind) {
    case UpdateKind::install:
      splice_template(s, upd.event.sid, te, true, db, cfg);
      break;
    case UpdateKind::replace:
      splice_template(s, upd.event.sid, te, false, db, cfg);
      break;
    case UpdateKind::pause:
      if (!s.paused_from) s.paused_from = te;
      break;
    case UpdateKind::resume:
      if (s.paused_from) {
        const TimeNs from = *s.paused_from;
        const TimeNs shift = te > from ? round_up(te - from, cfg.epsilon) : TimeNs{};
        for (std::size_t k = s.cursor; k < s.slots.size(); ++k)
          if (s.slots[k] > from) s.slots[k] += shift;
        s.pause_shift += shift;
        s.paused_from.reset();
      }
      break;
    case UpdateKind::extend_one: {
      TimeNs next = te;
      if (!s.slots.empty()) {
        const TimeNs step = s.spacing.count() > 0 ? s.spacing : cfg.epsilon;
        next = std::max(s.slots.back() + step, te);
      }
      s.slots.push_back(next);
      break;
    }
  }
  // Already-fired slots are history; no update may rewrite or retroactively block them.
  if (s.slots.size() < sched.cursor ||
      !std::equal(sched.slots.begin(), sched.slots.begin() + sched.cursor, s.slots.begin()))
    throw PrefixViolation("update at Te=" + std::to_string(te.count()) +
                          " rewrites already-fired slots");
  for (std::size_t k = 0; k < sched.cursor; ++k)
    if (s.blocked(k))
      throw PrefixViolation("update at Te=" + std::to_string(te.count()) +
                            " pauses an already-fired slot");
  return s;
}

const std::vector<ScheduleUpdate>& UpdateQueue::of(FlowId f) const {
  static const std::vector<ScheduleUpdate> empty;
  auto it = per_flow.find(f);
  return it == per_flow.end() ? empty : it->second;
}

void enqueue_update(UpdateQueue& q, FlowId flow, ScheduleUpdate upd) {
  if (upd.queued_at > upd.effective_at)
    throw OrderingViolation("queued_at " + std::to_string(upd.queued_at.count()) +
                            " > effective_at " + std::to_string(upd.effective_at.count()));
  if (q.temax && upd.effective_at <= *q.temax)
    throw OrderingViolation("effective_at " + std::to_string(upd.effective_at.count()) +
                            " does not exceed temax " + std::to_string(q.temax->count()));
  q.temax = upd.effective_at;
  q.per_flow[flow].push_back(std::move(upd));
}

bool holds_i1(const UpdateQueue& q) {
  for (const auto& [f, u] : q.per_flow)
    for (const auto& x : u)
      if (x.queued_at > x.effective_at) return false;
  return true;
}

bool holds_i2(const UpdateQueue& q) {
  for (const auto& [f, u] : q.per_flow)
    for (const auto& x : u)
      if (!q.temax || x.effective_at > *q.temax) return false;
  return true;
}

std::pair<TransmitSchedule, std::vector<ScheduleUpdate>> update_prof(
    TransmitSchedule sched, const std::vector<ScheduleUpdate>& u, TimeNs now,
    const ScheduleDb& db, const PacerConfig& cfg) {
  std::size_t i = 0;
  while (i < u.size() && u[i].queued_at <= now) {
    sched = apply_update(sched, u[i], db, cfg);
    ++i;
  }
  return {std::move(sched), std::vector<ScheduleUpdate>(u.begin() + i, u.end())};
}

}  // namespace pacer
