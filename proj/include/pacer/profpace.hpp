#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "pacer/core_types.hpp"
#include "pacer/schedule.hpp"
#include "pacer/tunnel.hpp"

namespace pacer {

struct Segment {
  int sid = kDefaultSid;
  FlowId flow;
  TimeNs d_i;
  std::vector<TimeNs> d_s;
  std::uint32_t p = 0;
  friend bool operator==(const Segment&, const Segment&) = default;
};

// A segment opens at an inbound packet or an indicator and collects the
// out_ready records that follow on that flow. A new inbound packet or
// indicator after responses have started closes it.
std::vector<Segment> segment_logs(const std::vector<EventRecord>& log);

// Nearest-rank percentile: the ceil(q/100 * n)-th smallest sample.
template <class T>
T percentile(std::vector<T> samples, double q) {
  if (samples.empty()) throw InsufficientData("percentile of an empty sample set");
  if (!(q > 0.0 && q <= 100.0)) throw ConfigError("percentile q must be in (0, 100]");
  const auto n = samples.size();
  // q/100*n in exact integer arithmetic when q is integral.
  std::size_t rank;
  if (q == static_cast<double>(static_cast<std::uint64_t>(q))) {
    const auto qi = static_cast<std::uint64_t>(q);
    rank = static_cast<std::size_t>((qi * n + 99) / 100);
  } else {
    rank = static_cast<std::size_t>(std::ceil(q / 100.0 * static_cast<double>(n)));
  }
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   samples.end());
  return samples[rank - 1];
}

ScheduleTemplate synthesize(const std::vector<Segment>& segments, const PacerConfig& cfg);

// One template per sid that has usable data; sids without it are listed in
// `skipped`.
struct ProfileResult {
  std::vector<ScheduleTemplate> templates;
  std::vector<int> skipped;
};
ProfileResult profile(const std::vector<EventRecord>& log, const PacerConfig& cfg);

}  // namespace pacer
