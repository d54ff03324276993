#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "pacer/core_types.hpp"

namespace pacer {

inline constexpr int kDefaultSid = 0;
inline constexpr int kNoSid = -1;

struct ScheduleTemplate {
  int sid = kDefaultSid;
  TimeNs initial_delay;
  TimeNs spacing;
  std::uint32_t count = 1;

  std::vector<TimeNs> offsets() const;
  friend bool operator==(const ScheduleTemplate&, const ScheduleTemplate&) = default;
};

class ScheduleDb {
 public:
  struct Entry {
    std::vector<TimeNs> offsets;
    TimeNs spacing;
  };

  // Rejects offsets that are empty, not strictly ascending, or start before cfg.delta.
  void add(int sid, std::vector<TimeNs> offsets, TimeNs spacing, const PacerConfig& cfg);
  void add(const ScheduleTemplate& t, const PacerConfig& cfg);

  bool contains(int sid) const { return entries_.count(sid) != 0; }
  const Entry& at(int sid) const;
  std::vector<int> sids() const;

  // Three templates (sids 0, 1, 2) used by the reference scenarios.
  static ScheduleDb standard(const PacerConfig& cfg);
  // Parses `sid,initial_delay_ns,spacing_ns,count` lines; requires the default sid.
  static ScheduleDb load(std::istream& is, const PacerConfig& cfg);

 private:
  std::map<int, Entry> entries_;
};

void write_schedule_db(std::ostream& os, const std::vector<ScheduleTemplate>& templates);

enum class UpdateKind : std::uint8_t { install, pause, resume, extend_one, replace };

struct UpdateEvent {
  UpdateKind kind = UpdateKind::pause;
  int sid = kNoSid;

  static UpdateEvent install(int sid) { return {UpdateKind::install, sid}; }
  static UpdateEvent replace(int sid) { return {UpdateKind::replace, sid}; }
  static UpdateEvent pause() { return {UpdateKind::pause, kNoSid}; }
  static UpdateEvent resume() { return {UpdateKind::resume, kNoSid}; }
  static UpdateEvent extend_one() { return {UpdateKind::extend_one, kNoSid}; }
  friend bool operator==(const UpdateEvent&, const UpdateEvent&) = default;
};

enum class CausalKind : std::uint8_t { request_arrival, ack_enables, timer_retransmit };

// The public network event that triggered an update. Used only for
// bookkeeping of causal delay floors.
struct Cause {
  CausalKind kind = CausalKind::request_arrival;
  TimeNs at;
  friend bool operator==(const Cause&, const Cause&) = default;
};

struct ScheduleUpdate {
  TimeNs queued_at;
  UpdateEvent event;
  TimeNs effective_at;
  std::optional<Cause> cause;

  friend bool operator==(const ScheduleUpdate&, const ScheduleUpdate&) = default;
};

// What HyPace may compare across runs: the event and its effective time.
struct UpdateProjection {
  UpdateEvent event;
  TimeNs effective_at;
  friend bool operator==(const UpdateProjection&, const UpdateProjection&) = default;
};
std::vector<UpdateProjection> project(const std::vector<ScheduleUpdate>& u);

struct TransmitSchedule {
  int sid = kNoSid;
  TimeNs anchor;
  std::vector<TimeNs> slots;  // absolute fire times, strictly ascending
  std::size_t cursor = 0;     // first un-fired slot
  std::optional<TimeNs> paused_from;
  TimeNs pause_shift;
  TimeNs spacing;

  bool paused() const { return paused_from.has_value(); }
  bool blocked(std::size_t k) const { return paused_from && slots[k] > *paused_from; }
  std::vector<TimeNs> offsets() const;
  // Slots at or before t that would actually fire (pause-blocked ones excluded).
  std::vector<TimeNs> fires_upto(TimeNs t) const;

  friend bool operator==(const TransmitSchedule&, const TransmitSchedule&) = default;
};

TransmitSchedule instantiate_default(const ScheduleDb& db, TimeNs arrival, const PacerConfig& cfg);

TransmitSchedule apply_update(const TransmitSchedule& sched, const ScheduleUpdate& upd,
                              const ScheduleDb& db, const PacerConfig& cfg);

struct UpdateQueue {
  std::map<FlowId, std::vector<ScheduleUpdate>> per_flow;
  std::optional<TimeNs> temax;

  std::vector<ScheduleUpdate>& of(FlowId f) { return per_flow[f]; }
  const std::vector<ScheduleUpdate>& of(FlowId f) const;
  friend bool operator==(const UpdateQueue&, const UpdateQueue&) = default;
};

// Throws OrderingViolation if Tu > Te or Te does not exceed the current temax.
void enqueue_update(UpdateQueue& q, FlowId flow, ScheduleUpdate upd);

bool holds_i1(const UpdateQueue& q);
bool holds_i2(const UpdateQueue& q);

// Applies the prefix of u with queued_at <= now; returns the rest untouched.
std::pair<TransmitSchedule, std::vector<ScheduleUpdate>> update_prof(
    TransmitSchedule sched, const std::vector<ScheduleUpdate>& u, TimeNs now,
    const ScheduleDb& db, const PacerConfig& cfg);

}  // namespace pacer
