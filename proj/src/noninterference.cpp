#include "pacer/noninterference.hpp"

#include <algorithm>

namespace pacer {

std::string Verdict::line() const {
  const char* head = kind == VerdictKind::pass   ? "PASS"
                     : kind == VerdictKind::fail ? "FAIL"
                                                 : "CONFORMANCE";
  std::string s = std::string(head) + " step=" + std::to_string(step) + " field=" + field;
  if (!detail.empty()) s += " detail=\"" + detail + "\"";
  return s;
}

std::size_t I3Witness::max_prefix() const {
  std::size_t m = 0;
  for (const auto& f : flows) m = std::max(m, f.v.size());
  return m;
}

namespace {

std::optional<FlowWitness> flow_witness(FlowId id, const Configuration& a, const Configuration& b) {
  const auto& ua = a.hypace.updates.of(id);
  const auto& ub = b.hypace.updates.of(id);
  const bool a_lags = ua.size() >= ub.size();
  const auto& longer = a_lags ? ua : ub;
  const auto& shorter = a_lags ? ub : ua;
  const std::size_t d = longer.size() - shorter.size();
  const std::vector<ScheduleUpdate> tail(longer.begin() + static_cast<std::ptrdiff_t>(d), longer.end());
  if (project(tail) != project(shorter)) return std::nullopt;

  FlowWitness w{id, a_lags, {longer.begin(), longer.begin() + static_cast<std::ptrdiff_t>(d)}};
  TransmitSchedule phi = (a_lags ? a : b).hypace.flows.at(id).sched;
  const auto& lead = (a_lags ? b : a).hypace.flows.at(id).sched;
  try {
    for (const auto& u : w.v) phi = apply_update(phi, u, a.hypace.db, a.hypace.cfg);
  } catch (const PacerError&) {
    return std::nullopt;
  }
  if (!(phi == lead)) return std::nullopt;
  return w;
}

}  // namespace

I3Check check_i3_detailed(const Configuration& a, const Configuration& b) {
  auto fail = [](std::string f) { return I3Check{std::nullopt, std::move(f)}; };
  if (a.tg() != b.tg()) return fail("tg");
  if (!trace_equal(trace_project(a.q_env), trace_project(b.q_env))) return fail("trace");
  if (!(a.env.pub == b.env.pub)) return fail("env_public");
  if (!(guest_public(a) == guest_public(b))) return fail("guest_public");
  if (a.q_guest != b.q_guest) return fail("q_guest");
  if (a.hypace.updates.temax != b.hypace.updates.temax) return fail("temax");
  I3Witness w;
  for (const auto& [id, fs] : a.hypace.flows) {
    if (!b.hypace.flows.count(id)) return fail("flows");
    auto fw = flow_witness(id, a, b);
    if (!fw) return fail("updates:flow=" + std::to_string(id.index()));
    w.flows.push_back(std::move(*fw));
  }
  return {std::move(w), {}};
}

std::optional<I3Witness> check_i3(const Configuration& a, const Configuration& b) {
  return check_i3_detailed(a, b).witness;
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

PairedRun nth_pair(const Scenario& base, std::uint32_t i) {
  PairedRun p;
  p.base = base;
  p.steps = base.epochs;
  p.secret_a = mix(base.seed ^ mix(2ull * i));
  p.secret_b = mix(base.seed ^ mix(2ull * i + 1));
  return p;
}

PairReport run_pair_report(const PairedRun& p) {
  PairReport r;
  const ReferenceEnv env(p.base);
  const ReferenceGuest guest(p.base);
  Configuration a = make_configuration(p.base, p.secret_a);
  Configuration b = make_configuration(p.base, p.secret_b);

  auto finish = [&](Verdict v) {
    r.verdict = std::move(v);
    r.trace_a = trace_project(a.q_env);
    r.trace_b = trace_project(b.q_env);
    r.causal = a.hypace.causal;
    return r;
  };

  for (std::uint32_t k = 0; k <= p.steps; ++k) {
    if (k > 0) {
      for (auto* side : {&a, &b}) {
        try {
          step(*side, env, guest);
        } catch (const PacerError& e) {
          return finish({VerdictKind::conformance, k, side == &a ? "side_a" : "side_b", e.what()});
        }
      }
    }
    auto chk = check_i3_detailed(a, b);
    if (!chk.witness) return finish({VerdictKind::fail, k, chk.failed_field, {}});
    ++r.i3_witnesses;
    r.max_prefix = std::max(r.max_prefix, chk.witness->max_prefix());
  }
  return finish({VerdictKind::pass, p.steps, "none", {}});
}

}  // namespace pacer
