#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "pacer/core_types.hpp"
#include "pacer/schedule.hpp"

namespace pacer {

struct Tuple5 {
  std::uint32_t src_addr = 0;
  std::uint16_t src_port = 0;
  std::uint32_t dst_addr = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t proto = 6;
  friend bool operator==(const Tuple5&, const Tuple5&) = default;
};

struct QueuedPacket {
  Packet pkt;
  TimeNs not_before;
  std::optional<Cause> cause;
};

struct EdgeChange {
  TimeNs effective_at;
  std::uint64_t edge = 0;
  TimeNs cause_at;
  friend bool operator==(const EdgeChange&, const EdgeChange&) = default;
};

struct FlowState {
  FlowId flow;
  Tuple5 tuple5;
  std::uint64_t next_seq = 1;
  // Highest sequence number HyPace may send. Lags the sender's view by delta.
  std::uint64_t cwnd_right_edge = 0;
  std::uint32_t rwnd = 0;
  std::deque<std::uint8_t> outbound;
  std::deque<QueuedPacket> pkt_queue;  // retransmissions waiting for a slot
  TransmitSchedule sched;
  bool key_installed = false;

  std::uint64_t initial_window = 0;
  std::uint64_t last_ack = 1;   // next sequence the peer expects
  std::uint32_t dup_acks = 0;
  std::uint64_t sender_edge = 0;
  std::vector<EdgeChange> pending_edges;
  std::vector<EdgeChange> edge_history;
  std::map<std::uint64_t, Packet> unacked;
  std::set<std::uint64_t> retransmitted;
  std::vector<TimeNs> acks_due;
  std::uint64_t backlog = 0;  // slots postponed while the window was closed
};

// The part of a flow an observer of the shaped link could in principle infer.
struct FlowPublic {
  std::uint64_t next_seq, cwnd_right_edge, last_ack, sender_edge, backlog;
  std::uint32_t rwnd, dup_acks;
  bool key_installed;
  std::vector<EdgeChange> pending_edges;
  std::vector<TimeNs> acks_due;
  std::vector<std::uint64_t> unacked, retransmitted;
  std::vector<std::pair<std::uint64_t, TimeNs>> queued;
  friend bool operator==(const FlowPublic&, const FlowPublic&) = default;
};
FlowPublic public_view(const FlowState& fs);

FlowState open_flow(FlowId flow, Tuple5 tuple, std::uint64_t initial_window, std::uint32_t rwnd);

enum class LogEvent : std::uint8_t { in_pkt, out_ready, indicator };

struct EventRecord {
  TimeNs ts;
  FlowId flow;
  LogEvent event = LogEvent::in_pkt;
  std::int64_t arg = 0;
  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

void write_event_log(std::ostream& os, const std::vector<EventRecord>& log);
std::vector<EventRecord> read_event_log(std::istream& is);

EventRecord enqueue_app_data(FlowState& fs, std::span<const std::uint8_t> bytes, TimeNs now);

bool cwnd_open(const FlowState& fs);

// Pulls min(outbound, rwnd, m_payload) bytes into a padded packet; an empty
// pull yields a dummy. Always consumes a sequence number.
Packet make_next_packet(FlowState& fs, const PacerConfig& cfg, TimeNs now);

// 2-byte pad length followed by payload and zero padding; m_payload + 2 bytes.
std::vector<std::uint8_t> seal_body(const Packet& p, const PacerConfig& cfg);
std::vector<std::uint8_t> open_body(std::span<const std::uint8_t> body, const PacerConfig& cfg);

// Returns the schedule install for an authenticated request, nothing otherwise.
std::optional<ScheduleUpdate> on_request_arrival(FlowState& fs, TimeNs arrival, bool authenticated,
                                                 int sid, const ScheduleDb& db,
                                                 const PacerConfig& cfg);

std::vector<ScheduleUpdate> on_ack(FlowState& fs, std::uint64_t ack_seq, std::uint32_t rwnd,
                                   TimeNs arrival, const PacerConfig& cfg);

std::vector<ScheduleUpdate> on_timeout(FlowState& fs, TimeNs fire_time, const PacerConfig& cfg);

}  // namespace pacer
