#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "pacer/errors.hpp"

namespace pacer {

// Simulated time. The simulator runs at 1 unit per microsecond, but the type
// never cares about the scale; all arithmetic is checked.
class TimeNs {
 public:
  constexpr TimeNs() = default;
  constexpr explicit TimeNs(std::int64_t v) : v_(v) {
    if (v < 0) throw TimeError("negative time");
  }

  constexpr std::int64_t count() const { return v_; }

  friend constexpr auto operator<=>(TimeNs, TimeNs) = default;

  friend TimeNs operator+(TimeNs a, TimeNs b) {
    std::int64_t r = 0;
    if (__builtin_add_overflow(a.v_, b.v_, &r)) throw TimeError("time overflow");
    return TimeNs(r);
  }
  // Throws when the result would be negative.
  friend TimeNs operator-(TimeNs a, TimeNs b) {
    if (b.v_ > a.v_) throw TimeError("time underflow");
    return TimeNs(a.v_ - b.v_);
  }
  friend TimeNs operator*(TimeNs a, std::int64_t k) {
    std::int64_t r = 0;
    if (k < 0 || __builtin_mul_overflow(a.v_, k, &r)) throw TimeError("time overflow");
    return TimeNs(r);
  }
  TimeNs& operator+=(TimeNs o) { return *this = *this + o; }

  static constexpr TimeNs max() { return TimeNs(std::numeric_limits<std::int64_t>::max()); }

 private:
  std::int64_t v_ = 0;
};

// Smallest multiple of step that is >= t. step must be positive.
TimeNs round_up(TimeNs t, TimeNs step);

std::ostream& operator<<(std::ostream& os, TimeNs t);

struct PacerConfig {
  TimeNs epsilon{120};
  TimeNs delta_xmit{35};
  TimeNs delta_delay{20000};
  TimeNs delta{20120};
  std::uint32_t batch_max = 38;
  std::uint32_t mtu = 1500;
  std::uint32_t m_payload = 1448;
  std::uint32_t n_flows = 1;

  // Builds a config with delta derived from epsilon and delta_delay.
  static PacerConfig make(TimeNs epsilon, TimeNs delta_xmit, TimeNs delta_delay,
                          std::uint32_t batch_max, std::uint32_t mtu,
                          std::uint32_t m_payload, std::uint32_t n_flows);
  static PacerConfig defaults(std::uint32_t n_flows = 1);

  void validate() const;
  friend bool operator==(const PacerConfig&, const PacerConfig&) = default;
};

class FlowId {
 public:
  constexpr FlowId() = default;
  constexpr explicit FlowId(std::uint32_t index) : index_(index) {}
  // Rejects indices outside [1, cfg.n_flows].
  static FlowId checked(std::uint32_t index, const PacerConfig& cfg);

  constexpr std::uint32_t index() const { return index_; }
  friend constexpr auto operator<=>(FlowId, FlowId) = default;

 private:
  std::uint32_t index_ = 1;
};

inline constexpr std::uint32_t kAckWireSize = 64;
inline constexpr std::uint32_t kPadHeaderBytes = 2;

enum class PacketKind : std::uint8_t { payload, dummy, ack };

struct Packet {
  FlowId flow;
  std::uint64_t seq = 0;
  PacketKind kind = PacketKind::dummy;
  std::uint32_t wire_size = 0;
  std::uint32_t pad_len = 0;
  std::vector<std::uint8_t> payload;
  TimeNs queued_at;

  static Packet data(FlowId flow, std::uint64_t seq, std::vector<std::uint8_t> bytes,
                     TimeNs queued_at, const PacerConfig& cfg);
  static Packet dummy(FlowId flow, std::uint64_t seq, TimeNs queued_at, const PacerConfig& cfg);
  static Packet ack(FlowId flow, std::uint64_t seq, TimeNs queued_at);

  // Throws ConfigError when the packet breaks a size invariant.
  void check(const PacerConfig& cfg) const;

  friend bool operator==(const Packet&, const Packet&) = default;
};

struct Emitted {
  TimeNs at;
  Packet pkt;
};

struct ObsEvent {
  TimeNs time;
  FlowId flow;
  std::uint32_t wire_size = 0;
  friend auto operator<=>(const ObsEvent&, const ObsEvent&) = default;
};

struct ObservationTrace {
  std::vector<ObsEvent> events;
  friend bool operator==(const ObservationTrace&, const ObservationTrace&) = default;
};

ObservationTrace trace_project(const std::vector<Emitted>& queue_e);
ObservationTrace canonical(ObservationTrace t);
bool trace_equal(const ObservationTrace& a, const ObservationTrace& b);

void write_trace_csv(std::ostream& os, const ObservationTrace& t);
ObservationTrace read_trace_csv(std::istream& is);

}  // namespace pacer
