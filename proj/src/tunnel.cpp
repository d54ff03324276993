#include "pacer/tunnel.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace pacer {

FlowPublic public_view(const FlowState& fs) {
  FlowPublic p{fs.next_seq, fs.cwnd_right_edge, fs.last_ack, fs.sender_edge, fs.backlog,
               fs.rwnd,     fs.dup_acks,        fs.key_installed, fs.pending_edges, fs.acks_due,
               {},          {},                 {}};
  for (const auto& [seq, pkt] : fs.unacked) p.unacked.push_back(seq);
  p.retransmitted.assign(fs.retransmitted.begin(), fs.retransmitted.end());
  for (const auto& q : fs.pkt_queue) p.queued.emplace_back(q.pkt.seq, q.not_before);
  return p;
}

FlowState open_flow(FlowId flow, Tuple5 tuple, std::uint64_t initial_window, std::uint32_t rwnd) {
  FlowState fs;
  fs.flow = flow;
  fs.tuple5 = tuple;
  fs.cwnd_right_edge = initial_window;
  fs.initial_window = initial_window;
  fs.sender_edge = initial_window;
  fs.rwnd = rwnd;
  fs.key_installed = true;
  return fs;
}

namespace {

const char* event_name(LogEvent e) {
  switch (e) {
    case LogEvent::in_pkt: return "in_pkt";
    case LogEvent::out_ready: return "out_ready";
    case LogEvent::indicator: return "indicator";
  }
  return "?";
}

}  // namespace

void write_event_log(std::ostream& os, const std::vector<EventRecord>& log) {
  for (const auto& r : log)
    os << r.ts.count() << ',' << r.flow.index() << ',' << event_name(r.event) << ',' << r.arg
       << '\n';
}

std::vector<EventRecord> read_event_log(std::istream& is) {
  std::vector<EventRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 4) throw ParseError(n, "expected ts_ns,flow,event,arg");
    EventRecord r;
    try {
      std::size_t used = 0;
      const long long ts = std::stoll(f[0], &used);
      if (used != f[0].size() || ts < 0) throw ParseError(n, "bad timestamp");
      const long long flow = std::stoll(f[1], &used);
      if (used != f[1].size() || flow < 1) throw ParseError(n, "bad flow");
      r.arg = std::stoll(f[3], &used);
      if (used != f[3].size()) throw ParseError(n, "bad arg");
      r.ts = TimeNs(ts);
      r.flow = FlowId(static_cast<std::uint32_t>(flow));
    } catch (const std::logic_error&) {
      throw ParseError(n, "non-numeric field");
    }
    if (f[2] == "in_pkt") r.event = LogEvent::in_pkt;
    else if (f[2] == "out_ready") r.event = LogEvent::out_ready;
    else if (f[2] == "indicator") r.event = LogEvent::indicator;
    else throw ParseError(n, "unknown event '" + f[2] + "'");
    out.push_back(r);
  }
  return out;
}

EventRecord enqueue_app_data(FlowState& fs, std::span<const std::uint8_t> bytes, TimeNs now) {
  fs.outbound.insert(fs.outbound.end(), bytes.begin(), bytes.end());
  return {now, fs.flow, LogEvent::out_ready, static_cast<std::int64_t>(bytes.size())};
}

bool cwnd_open(const FlowState& fs) { return fs.next_seq <= fs.cwnd_right_edge; }

Packet make_next_packet(FlowState& fs, const PacerConfig& cfg, TimeNs now) {
  const std::size_t take =
      std::min<std::size_t>({fs.outbound.size(), fs.rwnd, cfg.m_payload});
  std::vector<std::uint8_t> bytes(fs.outbound.begin(), fs.outbound.begin() + take);
  fs.outbound.erase(fs.outbound.begin(), fs.outbound.begin() + take);
  Packet p = Packet::data(fs.flow, fs.next_seq++, std::move(bytes), now, cfg);
  fs.unacked.emplace(p.seq, p);
  return p;
}

std::vector<std::uint8_t> seal_body(const Packet& p, const PacerConfig& cfg) {
  p.check(cfg);
  std::vector<std::uint8_t> body;
  body.reserve(kPadHeaderBytes + cfg.m_payload);
  body.push_back(static_cast<std::uint8_t>(p.pad_len >> 8));
  body.push_back(static_cast<std::uint8_t>(p.pad_len & 0xFF));
  body.insert(body.end(), p.payload.begin(), p.payload.end());
  body.resize(kPadHeaderBytes + cfg.m_payload, 0);
  return body;
}

std::vector<std::uint8_t> open_body(std::span<const std::uint8_t> body, const PacerConfig& cfg) {
  if (body.size() != kPadHeaderBytes + cfg.m_payload) throw ConfigError("body has wrong length");
  const std::uint32_t pad = (std::uint32_t{body[0]} << 8) | body[1];
  if (pad > cfg.m_payload) throw ConfigError("pad header exceeds m_payload");
  const auto first = body.begin() + kPadHeaderBytes;
  return {first, first + (cfg.m_payload - pad)};
}

std::optional<ScheduleUpdate> on_request_arrival(FlowState& fs, TimeNs arrival, bool authenticated,
                                                 int sid, const ScheduleDb& db,
                                                 const PacerConfig& cfg) {
  if (!authenticated || !fs.key_installed) return std::nullopt;
  if (!db.contains(sid)) sid = kDefaultSid;
  fs.acks_due.push_back(arrival);
  return ScheduleUpdate{arrival, UpdateEvent::install(sid), arrival + cfg.delta,
                        Cause{CausalKind::request_arrival, arrival}};
}

namespace {

std::optional<ScheduleUpdate> retransmit(FlowState& fs, std::uint64_t seq, Cause cause,
                                         const PacerConfig& cfg) {
  auto it = fs.unacked.find(seq);
  if (it == fs.unacked.end() || fs.retransmitted.count(seq)) return std::nullopt;
  const TimeNs te = cause.at + cfg.delta;
  fs.retransmitted.insert(seq);
  fs.pkt_queue.push_back({it->second, te, cause});
  return ScheduleUpdate{cause.at, UpdateEvent::extend_one(), te, cause};
}

}  // namespace

std::vector<ScheduleUpdate> on_ack(FlowState& fs, std::uint64_t ack_seq, std::uint32_t rwnd,
                                   TimeNs arrival, const PacerConfig& cfg) {
  std::vector<ScheduleUpdate> out;
  fs.rwnd = rwnd;
  const Cause cause{CausalKind::ack_enables, arrival};
  if (ack_seq > fs.last_ack) {
    fs.sender_edge += ack_seq - fs.last_ack;
    fs.pending_edges.push_back({arrival + cfg.delta, fs.sender_edge, arrival});
    fs.unacked.erase(fs.unacked.begin(), fs.unacked.lower_bound(ack_seq));
    fs.last_ack = ack_seq;
    fs.dup_acks = 0;
    if (fs.sched.paused())
      out.push_back({arrival, UpdateEvent::resume(), arrival + cfg.delta, cause});
  } else if (ack_seq == fs.last_ack && fs.unacked.count(ack_seq)) {
    if (++fs.dup_acks == 3)
      if (auto u = retransmit(fs, ack_seq, cause, cfg)) out.push_back(*u);
  }
  return out;
}

std::vector<ScheduleUpdate> on_timeout(FlowState& fs, TimeNs fire_time, const PacerConfig& cfg) {
  for (const auto& [seq, pkt] : fs.unacked) {
    if (fs.retransmitted.count(seq)) continue;
    if (auto u = retransmit(fs, seq, {CausalKind::timer_retransmit, fire_time}, cfg)) return {*u};
  }
  return {};
}

}  // namespace pacer
