#include "pacer/epoch_engine.hpp"

#include <string>

namespace pacer {

HandlerDelayModel no_handler_delay() {
  return [](std::uint64_t, std::uint64_t, std::uint64_t) { return TimeNs{}; };
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

HandlerDelayModel hashed_handler_delay(TimeNs max_delay) {
  return [max_delay](std::uint64_t seed, std::uint64_t epoch, std::uint64_t secret) {
    const std::uint64_t h = mix(mix(mix(seed) ^ epoch) ^ secret);
    return TimeNs(static_cast<std::int64_t>(h % static_cast<std::uint64_t>(max_delay.count() + 1)));
  };
}

EpochEngine make_engine(const PacerConfig& cfg, ScheduleDb db) {
  cfg.validate();
  EpochEngine e;
  e.cfg = cfg;
  e.db = std::move(db);
  return e;
}

namespace {

void promote_edges(FlowState& fs, TimeNs t) {
  auto it = fs.pending_edges.begin();
  while (it != fs.pending_edges.end() && it->effective_at <= t) {
    fs.cwnd_right_edge = it->edge;
    fs.edge_history.push_back(*it);
    ++it;
  }
  fs.pending_edges.erase(fs.pending_edges.begin(), it);
}

// The ACK whose window change first let `seq` out, if any.
std::optional<TimeNs> enabling_ack(const FlowState& fs, std::uint64_t seq) {
  if (seq <= fs.initial_window) return std::nullopt;
  for (const auto& ch : fs.edge_history)
    if (ch.edge >= seq) return ch.cause_at;
  return std::nullopt;
}

}  // namespace

std::vector<Emitted> run_epoch(EpochEngine& e) {
  const PacerConfig& cfg = e.cfg;
  const TimeNs delay = e.handler_delay(e.seed, e.epoch_index(), e.secret_tag);
  if (delay > cfg.delta_xmit)
    throw MaskingViolation("handler delay " + std::to_string(delay.count()) + " exceeds delta_xmit " +
                           std::to_string(cfg.delta_xmit.count()));
  const TimeNs end = e.now + cfg.epsilon;
  const TimeNs stamp = e.faults.delay_in_timestamp ? end + delay : end;

  for (auto& [id, fs] : e.flows) {
    promote_edges(fs, end);
    auto& u = e.updates.of(id);
    auto [sched, rest] = update_prof(fs.sched, u, end, e.db, cfg);
    for (std::size_t i = 0; i < u.size() - rest.size(); ++i)
      if (u[i].cause) e.marks[id].push_back({u[i].effective_at, *u[i].cause});
    fs.sched = std::move(sched);
    u = std::move(rest);
  }

  std::vector<Emitted> out;
  for (auto& [id, fs] : e.flows) {
    for (auto t : fs.acks_due) out.push_back({stamp, Packet::ack(id, 0, t)});
    fs.acks_due.clear();

    std::uint64_t chances = fs.backlog;
    auto& sched = fs.sched;
    auto& marks = e.marks[id];
    while (sched.cursor < sched.slots.size() && sched.slots[sched.cursor] <= end &&
           !sched.blocked(sched.cursor)) {
      const TimeNs slot = sched.slots[sched.cursor++];
      ++chances;
      for (auto it = marks.begin(); it != marks.end();) {
        if (slot >= it->effective_at) {
          e.armed[id].push_back(it->cause);
          it = marks.erase(it);
        } else {
          ++it;
        }
      }
    }

    fs.backlog = 0;
    for (std::uint64_t i = 0; i < chances; ++i) {
      Packet p;
      if (!fs.pkt_queue.empty() && fs.pkt_queue.front().not_before <= end) {
        QueuedPacket q = std::move(fs.pkt_queue.front());
        fs.pkt_queue.pop_front();
        if (q.cause) e.causal.push_back({q.cause->kind, id, q.cause->at, stamp});
        p = std::move(q.pkt);
      } else if (cwnd_open(fs)) {
        p = make_next_packet(fs, cfg, end);
        if (auto ack_at = enabling_ack(fs, p.seq))
          e.causal.push_back({CausalKind::ack_enables, id, *ack_at, stamp});
        if (e.faults.suppress_dummies && p.kind == PacketKind::dummy) continue;
      } else {
        fs.backlog = chances - i;
        break;
      }
      for (const auto& c : e.armed[id]) e.causal.push_back({c.kind, id, c.at, stamp});
      e.armed[id].clear();
      if (e.faults.expose_pad_len && p.kind != PacketKind::ack) p.wire_size = cfg.mtu - p.pad_len;
      out.push_back({stamp, std::move(p)});
    }
  }
  if (out.size() > cfg.batch_max)
    throw BatchOverflow(std::to_string(out.size()) + " packets due in one epoch, batch_max " +
                        std::to_string(cfg.batch_max));
  e.now = end;
  return out;
}

std::optional<std::pair<FlowId, TimeNs>> peek_next_slot(const EpochEngine& e) {
  std::optional<std::pair<FlowId, TimeNs>> best;
  for (const auto& [id, fs] : e.flows) {
    const auto& s = fs.sched;
    for (std::size_t k = s.cursor; k < s.slots.size(); ++k) {
      if (s.blocked(k)) continue;
      if (!best || s.slots[k] < best->second) best = {{id, s.slots[k]}};
      break;
    }
  }
  return best;
}

}  // namespace pacer
