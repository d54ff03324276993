#include "pacer/simnet.hpp"

#include <algorithm>
#include <istream>
#include <sstream>

namespace pacer {

const char* mutant_name(Mutant m) {
  switch (m) {
    case Mutant::none: return "none";
    case Mutant::secret_te: return "secret-te";
    case Mutant::handler_delay_timestamp: return "handler-delay-timestamp";
    case Mutant::pad_len_exposure: return "pad-len-exposure";
    case Mutant::secret_sid: return "secret-sid";
    case Mutant::dummy_suppression: return "dummy-suppression";
  }
  return "?";
}

const std::vector<Mutant>& all_mutants() {
  static const std::vector<Mutant> v{Mutant::secret_te, Mutant::handler_delay_timestamp,
                                     Mutant::pad_len_exposure, Mutant::secret_sid,
                                     Mutant::dummy_suppression};
  return v;
}

Mutant parse_mutant(const std::string& s) {
  if (s == "none") return Mutant::none;
  for (auto m : all_mutants())
    if (s == mutant_name(m)) return m;
  throw ConfigError("unknown mutant '" + s + "'");
}

namespace {

std::uint64_t to_u64(const std::string& v, const std::string& key) {
  std::size_t used = 0;
  unsigned long long x = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    x = std::stoull(v, &used);
  } catch (const std::logic_error&) {
    throw ConfigError("bad value for " + key + ": '" + v + "'");
  }
  if (used != v.size()) throw ConfigError("bad value for " + key + ": '" + v + "'");
  return x;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string cell; std::getline(ss, cell, sep);) out.push_back(cell);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <class F>
void for_each_kv(std::istream& is, F&& f) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(n, "expected key=value");
    try {
      f(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), n);
    } catch (const ParseError&) {
      throw;
    } catch (const PacerError& e) {
      throw ParseError(n, e.what());
    }
  }
}

}  // namespace

bool set_config_key(PacerConfig& cfg, const std::string& key, const std::string& value) {
  auto t = [&] { return TimeNs(static_cast<std::int64_t>(to_u64(value, key))); };
  auto u = [&] { return static_cast<std::uint32_t>(to_u64(value, key)); };
  if (key == "epsilon") cfg.epsilon = t();
  else if (key == "delta_xmit") cfg.delta_xmit = t();
  else if (key == "delta_delay") cfg.delta_delay = t();
  else if (key == "batch_max") cfg.batch_max = u();
  else if (key == "mtu") cfg.mtu = u();
  else if (key == "m_payload") cfg.m_payload = u();
  else if (key == "n_flows") cfg.n_flows = u();
  else return false;
  cfg.delta = cfg.epsilon + cfg.delta_delay;
  return true;
}

PacerConfig parse_config(std::istream& is) {
  PacerConfig cfg = PacerConfig::defaults();
  for_each_kv(is, [&](const std::string& k, const std::string& v, std::size_t n) {
    if (!set_config_key(cfg, k, v)) throw ParseError(n, "unknown config key '" + k + "'");
  });
  cfg.validate();
  return cfg;
}

Scenario parse_scenario(std::istream& is) {
  Scenario s;
  s.cfg = PacerConfig::defaults(1);
  bool delay_max_set = false;
  struct RawReq {
    std::uint64_t flow, at;
    int sid;
    bool auth;
    std::size_t line;
  };
  std::vector<RawReq> reqs;
  std::vector<std::pair<std::uint64_t, std::size_t>> loss_flows;
  for_each_kv(is, [&](const std::string& k, const std::string& v, std::size_t n) {
    if (set_config_key(s.cfg, k, v)) return;
    if (k == "seed") s.seed = to_u64(v, k);
    else if (k == "secret_seed") s.secret_seed = to_u64(v, k);
    else if (k == "epochs") s.epochs = static_cast<std::uint32_t>(to_u64(v, k));
    else if (k == "rwnd") s.rwnd = static_cast<std::uint32_t>(to_u64(v, k));
    else if (k == "rtt") s.rtt = TimeNs(static_cast<std::int64_t>(to_u64(v, k)));
    else if (k == "rtt_jitter") s.rtt_jitter = TimeNs(static_cast<std::int64_t>(to_u64(v, k)));
    else if (k == "rto") s.rto = TimeNs(static_cast<std::int64_t>(to_u64(v, k)));
    else if (k == "initial_window") s.initial_window = to_u64(v, k);
    else if (k == "max_response") s.max_response = static_cast<std::uint32_t>(to_u64(v, k));
    else if (k == "mutant") s.mutant = parse_mutant(v);
    else if (k == "handler_delay_max") {
      s.handler_delay_max = TimeNs(static_cast<std::int64_t>(to_u64(v, k)));
      delay_max_set = true;
    } else if (k == "request") {
      const auto f = split(v, ',');
      if (f.size() < 2 || f.size() > 4) throw ParseError(n, "request=flow,time[,sid[,unauth]]");
      RawReq r{to_u64(f[0], k), to_u64(f[1], k), 0, true, n};
      if (f.size() >= 3) r.sid = static_cast<int>(to_u64(f[2], k));
      if (f.size() == 4) {
        if (f[3] != "unauth") throw ParseError(n, "fourth request field must be 'unauth'");
        r.auth = false;
      }
      reqs.push_back(r);
    } else if (k == "loss") {
      const auto f = split(v, ',');
      if (f.size() != 2) throw ParseError(n, "loss=flow,seq");
      loss_flows.emplace_back(to_u64(f[0], k), n);
      s.losses.emplace_back(FlowId(static_cast<std::uint32_t>(to_u64(f[0], k))), to_u64(f[1], k));
    } else if (k == "congestion") {
      const auto f = split(v, ',');
      if (f.size() != 2) throw ParseError(n, "congestion=start,duration");
      s.congestion.push_back({TimeNs(static_cast<std::int64_t>(to_u64(f[0], k))),
                              TimeNs(static_cast<std::int64_t>(to_u64(f[1], k)))});
    } else {
      throw ParseError(n, "unknown key '" + k + "'");
    }
  });
  s.cfg.validate();
  if (!delay_max_set) s.handler_delay_max = s.cfg.delta_xmit;
  for (const auto& r : reqs) {
    try {
      s.requests.push_back({FlowId::checked(static_cast<std::uint32_t>(r.flow), s.cfg),
                            TimeNs(static_cast<std::int64_t>(r.at)), r.sid, r.auth});
    } catch (const PacerError& e) {
      throw ParseError(r.line, e.what());
    }
  }
  for (const auto& [flow, line] : loss_flows) {
    try {
      FlowId::checked(static_cast<std::uint32_t>(flow), s.cfg);
    } catch (const PacerError& e) {
      throw ParseError(line, e.what());
    }
  }
  return s;
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

GuestPublic guest_public(const Configuration& c) {
  GuestPublic p;
  p.events_seen = c.guest.events_seen;
  for (const auto& [id, fs] : c.hypace.flows) p.flows.emplace(id, public_view(fs));
  return p;
}

void ReferenceEnv::step(Configuration& c, TimeNs epoch_end) const {
  auto& pub = c.env.pub;
  for (; c.env_consumed < c.q_env.size(); ++c.env_consumed) {
    const Emitted& em = c.q_env[c.env_consumed];
    if (em.pkt.kind == PacketKind::ack) continue;
    const FlowId f = em.pkt.flow;
    const std::uint64_t seq = em.pkt.seq;
    auto& cl = pub.clients[f];
    ++cl.data_seen;
    const bool planned_loss =
        std::find(s_.losses.begin(), s_.losses.end(), std::pair{f, seq}) != s_.losses.end();
    if (planned_loss && pub.dropped.insert({f, seq}).second) {
      pub.pending.push_back({em.at + s_.rto, f, InboundEvent::Kind::timeout});
      continue;
    }
    if (seq >= cl.next_expected) cl.received.insert(seq);
    while (cl.received.count(cl.next_expected)) cl.received.erase(cl.next_expected++);
    const auto jitter = static_cast<std::int64_t>(
        mix(s_.seed ^ mix(f.index() ^ mix(cl.data_seen))) %
        static_cast<std::uint64_t>(s_.rtt_jitter.count() + 1));
    TimeNs at = em.at + s_.rtt + TimeNs(jitter);
    for (const auto& w : s_.congestion)
      if (at >= w.start && at < w.start + w.duration) at = w.start + w.duration;
    InboundEvent ack{at, f, InboundEvent::Kind::ack};
    ack.ack_seq = cl.next_expected;
    ack.rwnd = s_.rwnd;
    pub.pending.push_back(ack);
  }
  std::sort(pub.pending.begin(), pub.pending.end());
  auto cut = std::upper_bound(pub.pending.begin(), pub.pending.end(), epoch_end,
                              [](TimeNs t, const InboundEvent& ev) { return t < ev.at; });
  c.q_guest.insert(c.q_guest.end(), pub.pending.begin(), cut);
  pub.pending.erase(pub.pending.begin(), cut);
  std::sort(c.q_guest.begin(), c.q_guest.end());
}

namespace {

void submit(EpochEngine& e, FlowId f, ScheduleUpdate u) {
  const auto& temax = e.updates.temax;
  if (temax && u.effective_at <= *temax) u.effective_at = *temax + TimeNs(1);
  enqueue_update(e.updates, f, std::move(u));
}

}  // namespace

void ReferenceGuest::step(Configuration& c, TimeNs epoch_end) const {
  auto& g = c.guest;
  auto& e = c.hypace;
  const PacerConfig& cfg = e.cfg;
  const auto max_delay = static_cast<std::uint64_t>(cfg.delta_delay.count());
  auto secret_delay = [&] { return TimeNs(static_cast<std::int64_t>(g.secret_rng() % (max_delay + 1))); };

  auto cut = std::upper_bound(c.q_guest.begin(), c.q_guest.end(), epoch_end,
                              [](TimeNs t, const InboundEvent& ev) { return t < ev.at; });
  std::vector<InboundEvent> events(c.q_guest.begin(), cut);
  c.q_guest.erase(c.q_guest.begin(), cut);

  for (const auto& ev : events) {
    ++g.events_seen;
    FlowState& fs = e.flows.at(ev.flow);
    switch (ev.kind) {
      case InboundEvent::Kind::request: {
        g.log.push_back({ev.at, ev.flow, LogEvent::in_pkt, 0});
        auto upd = on_request_arrival(fs, ev.at, ev.authenticated, ev.sid, e.db, cfg);
        if (!upd) break;
        const TimeNs d = secret_delay();
        if (s_.mutant == Mutant::secret_sid) {
          const auto sids = e.db.sids();
          upd->event.sid = sids[g.secret_rng() % sids.size()];
        }
        upd->queued_at = ev.at + d;
        if (s_.mutant == Mutant::secret_te) upd->effective_at += d;
        g.log.push_back({ev.at + d, ev.flow, LogEvent::indicator, upd->event.sid});
        submit(e, ev.flow, *upd);
        std::vector<std::uint8_t> body(g.secret_rng() % (s_.max_response + 1));
        for (auto& b : body) b = static_cast<std::uint8_t>(g.secret_rng());
        g.writes.push_back({ev.at + d, ev.flow, std::move(body)});
        break;
      }
      case InboundEvent::Kind::ack:
        for (auto& u : on_ack(fs, ev.ack_seq, ev.rwnd, ev.at, cfg)) {
          u.queued_at = ev.at + secret_delay();
          submit(e, ev.flow, u);
        }
        break;
      case InboundEvent::Kind::timeout:
        for (auto& u : on_timeout(fs, ev.at, cfg)) {
          u.queued_at = ev.at + secret_delay();
          submit(e, ev.flow, u);
        }
        break;
    }
  }

  std::stable_sort(g.writes.begin(), g.writes.end(),
                   [](const PendingWrite& a, const PendingWrite& b) { return a.at < b.at; });
  auto w = g.writes.begin();
  for (; w != g.writes.end() && w->at <= epoch_end; ++w)
    g.log.push_back(enqueue_app_data(e.flows.at(w->flow), w->bytes, w->at));
  g.writes.erase(g.writes.begin(), w);
}

Configuration make_configuration(const Scenario& s, std::uint64_t secret_seed) {
  Configuration c;
  c.hypace = make_engine(s.cfg, ScheduleDb::standard(s.cfg));
  for (std::uint32_t i = 1; i <= s.cfg.n_flows; ++i) {
    const FlowId f(i);
    const Tuple5 t{0x0A000001, 443, 0x0A000100 + i, static_cast<std::uint16_t>(40000 + i), 6};
    c.hypace.flows.emplace(f, open_flow(f, t, s.initial_window, s.rwnd));
    c.env.pub.clients[f];
  }
  c.hypace.seed = s.seed;
  c.hypace.secret_tag = secret_seed;
  c.hypace.handler_delay = hashed_handler_delay(s.handler_delay_max);
  c.hypace.faults.delay_in_timestamp = s.mutant == Mutant::handler_delay_timestamp;
  c.hypace.faults.expose_pad_len = s.mutant == Mutant::pad_len_exposure;
  c.hypace.faults.suppress_dummies = s.mutant == Mutant::dummy_suppression;
  c.guest.secret_rng.seed(secret_seed);
  for (const auto& r : s.requests) {
    FlowId::checked(r.flow.index(), s.cfg);
    InboundEvent ev{r.at, r.flow, InboundEvent::Kind::request};
    ev.sid = r.sid;
    ev.authenticated = r.authenticated;
    c.env.pub.pending.push_back(ev);
  }
  std::sort(c.env.pub.pending.begin(), c.env.pub.pending.end());
  return c;
}

void step(Configuration& c, const EnvModel& env, const GuestModel& guest) {
  const TimeNs end = c.tg() + c.hypace.cfg.epsilon;
  env.step(c, end);
  guest.step(c, end);
  for (const auto& ev : c.q_guest)
    if (ev.at <= end) throw ConformanceViolation("guest left a due inbound event unconsumed");
  auto out = run_epoch(c.hypace);
  for (auto& em : out) c.q_env.push_back(std::move(em));
  if (!holds_i1(c.hypace.updates)) throw ConformanceViolation("I1 violated (Tu > Te)");
  if (!holds_i2(c.hypace.updates)) throw ConformanceViolation("I2 violated (Te > temax)");
}

ObservationTrace run(Configuration& c, std::uint32_t n, const EnvModel& env,
                     const GuestModel& guest) {
  for (std::uint32_t i = 0; i < n; ++i) step(c, env, guest);
  return trace_project(c.q_env);
}

std::vector<TimeNs> contention_observe(const ObservationTrace& trace, TimeNs probe_interval,
                                       std::uint32_t bottleneck_rate, TimeNs horizon,
                                       std::uint32_t probe_size) {
  if (probe_interval.count() <= 0 || bottleneck_rate == 0)
    throw ConfigError("contention_observe: rates must be positive");
  struct Arrival {
    TimeNs at;
    bool probe;
    std::uint32_t size;
  };
  std::vector<Arrival> arrivals;
  for (const auto& ev : trace.events) arrivals.push_back({ev.time, false, ev.wire_size});
  for (TimeNs t{}; t <= horizon; t += probe_interval) arrivals.push_back({t, true, probe_size});
  std::stable_sort(arrivals.begin(), arrivals.end(), [](const Arrival& a, const Arrival& b) {
    return a.at != b.at ? a.at < b.at : (!a.probe && b.probe);
  });
  std::vector<TimeNs> delays;
  TimeNs free_at{};
  for (const auto& a : arrivals) {
    const TimeNs start = std::max(a.at, free_at);
    if (a.probe) delays.push_back(start - a.at);
    const std::int64_t service = (a.size + bottleneck_rate - 1) / bottleneck_rate;
    free_at = start + TimeNs(service);
  }
  return delays;
}

}  // namespace pacer
