#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pacer/simnet.hpp"

namespace pacer {

struct PairedRun {
  Scenario base;
  std::uint64_t secret_a = 1;
  std::uint64_t secret_b = 2;
  std::uint32_t steps = 200;
};

enum class VerdictKind : std::uint8_t { pass, fail, conformance };

struct Verdict {
  VerdictKind kind = VerdictKind::pass;
  std::uint32_t step = 0;
  std::string field = "none";
  std::string detail;

  bool passed() const { return kind == VerdictKind::pass; }
  // `PASS|FAIL step=<k> field=<name>`; model errors print as CONFORMANCE.
  std::string line() const;
};

struct FlowWitness {
  FlowId flow;
  bool a_lags = true;                // a still holds the prefix v that b already applied
  std::vector<ScheduleUpdate> v;
};

struct I3Witness {
  std::vector<FlowWitness> flows;
  std::size_t max_prefix() const;
};

struct I3Check {
  std::optional<I3Witness> witness;
  std::string failed_field;  // set when witness is empty
};

I3Check check_i3_detailed(const Configuration& a, const Configuration& b);
std::optional<I3Witness> check_i3(const Configuration& a, const Configuration& b);

struct PairReport {
  Verdict verdict;
  ObservationTrace trace_a;
  ObservationTrace trace_b;
  std::uint32_t i3_witnesses = 0;
  std::size_t max_prefix = 0;
  std::vector<CausalPair> causal;  // from side a
};

PairReport run_pair_report(const PairedRun& p);
inline Verdict run_pair(const PairedRun& p) { return run_pair_report(p).verdict; }

// Secret pair number i for a scenario seed; used by `verify` and the tests.
PairedRun nth_pair(const Scenario& base, std::uint32_t i);

}  // namespace pacer
