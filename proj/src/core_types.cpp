#include "pacer/core_types.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace pacer {

TimeNs round_up(TimeNs t, TimeNs step) {
  if (step.count() <= 0) throw TimeError("round_up: non-positive step");
  const std::int64_t rem = t.count() % step.count();
  return rem == 0 ? t : t + TimeNs(step.count() - rem);
}

std::ostream& operator<<(std::ostream& os, TimeNs t) { return os << t.count(); }

PacerConfig PacerConfig::make(TimeNs epsilon, TimeNs delta_xmit, TimeNs delta_delay,
                              std::uint32_t batch_max, std::uint32_t mtu,
                              std::uint32_t m_payload, std::uint32_t n_flows) {
  PacerConfig c;
  c.epsilon = epsilon;
  c.delta_xmit = delta_xmit;
  c.delta_delay = delta_delay;
  c.delta = epsilon + delta_delay;
  c.batch_max = batch_max;
  c.mtu = mtu;
  c.m_payload = m_payload;
  c.n_flows = n_flows;
  c.validate();
  return c;
}

PacerConfig PacerConfig::defaults(std::uint32_t n_flows) {
  PacerConfig c;
  c.n_flows = n_flows;
  c.validate();
  return c;
}

void PacerConfig::validate() const {
  if (epsilon.count() <= 0) throw ConfigError("epsilon must be positive");
  if (delta != epsilon + delta_delay) throw ConfigError("delta != epsilon + delta_delay");
  if (m_payload >= mtu) throw ConfigError("m_payload must be below mtu");
  if (m_payload == 0 || m_payload > 0xFFFF) throw ConfigError("m_payload out of range");
  if (mtu <= kAckWireSize) throw ConfigError("mtu too small");
  if (batch_max < 1) throw ConfigError("batch_max must be >= 1");
  if (n_flows < 1) throw ConfigError("n_flows must be >= 1");
}

FlowId FlowId::checked(std::uint32_t index, const PacerConfig& cfg) {
  if (index < 1 || index > cfg.n_flows)
    throw ConfigError("flow " + std::to_string(index) + " outside [1, " +
                      std::to_string(cfg.n_flows) + "]");
  return FlowId(index);
}

Packet Packet::data(FlowId flow, std::uint64_t seq, std::vector<std::uint8_t> bytes,
                    TimeNs queued_at, const PacerConfig& cfg) {
  if (bytes.size() > cfg.m_payload) throw ConfigError("payload exceeds m_payload");
  Packet p;
  p.flow = flow;
  p.seq = seq;
  p.kind = bytes.empty() ? PacketKind::dummy : PacketKind::payload;
  p.wire_size = cfg.mtu;
  p.pad_len = cfg.m_payload - static_cast<std::uint32_t>(bytes.size());
  p.payload = std::move(bytes);
  p.queued_at = queued_at;
  return p;
}

Packet Packet::dummy(FlowId flow, std::uint64_t seq, TimeNs queued_at, const PacerConfig& cfg) {
  return data(flow, seq, {}, queued_at, cfg);
}

Packet Packet::ack(FlowId flow, std::uint64_t seq, TimeNs queued_at) {
  Packet p;
  p.flow = flow;
  p.seq = seq;
  p.kind = PacketKind::ack;
  p.wire_size = kAckWireSize;
  p.queued_at = queued_at;
  return p;
}

void Packet::check(const PacerConfig& cfg) const {
  switch (kind) {
    case PacketKind::ack:
      if (wire_size >= cfg.mtu || pad_len != 0) throw ConfigError("ack must be unpadded");
      break;
    case PacketKind::dummy:
      if (pad_len != cfg.m_payload || !payload.empty())
        throw ConfigError("dummy must be fully padded");
      [[fallthrough]];
    case PacketKind::payload:
      if (wire_size != cfg.mtu) throw ConfigError("data packet wire_size != mtu");
      if (pad_len + payload.size() != cfg.m_payload) throw ConfigError("pad_len mismatch");
      break;
  }
}

ObservationTrace trace_project(const std::vector<Emitted>& queue_e) {
  ObservationTrace t;
  t.events.reserve(queue_e.size());
  for (const auto& e : queue_e) t.events.push_back({e.at, e.pkt.flow, e.pkt.wire_size});
  return t;
}

ObservationTrace canonical(ObservationTrace t) {
  std::sort(t.events.begin(), t.events.end());
  return t;
}

bool trace_equal(const ObservationTrace& a, const ObservationTrace& b) {
  if (a.events.size() != b.events.size()) return false;
  return canonical(a) == canonical(b);
}

void write_trace_csv(std::ostream& os, const ObservationTrace& t) {
  for (const auto& e : t.events)
    os << e.time.count() << ',' << e.flow.index() << ',' << e.wire_size << '\n';
}

ObservationTrace read_trace_csv(std::istream& is) {
  ObservationTrace t;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    std::istringstream ls(line);
    long long time = 0;
    unsigned flow = 0, size = 0;
    char c1 = 0, c2 = 0;
    if (!(ls >> time >> c1 >> flow >> c2 >> size) || c1 != ',' || c2 != ',' || time < 0)
      throw ParseError(n, "expected time_ns,flow,wire_size");
    t.events.push_back({TimeNs(time), FlowId(flow), size});
  }
  return t;
}

}  // namespace pacer
