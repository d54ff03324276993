#include "pacer/profpace.hpp"

#include <optional>
#include <set>

namespace pacer {

namespace {

struct Open {
  std::size_t index;  // into the output vector
  TimeNs start;
  std::optional<TimeNs> last_out;
};

}  // namespace

std::vector<Segment> segment_logs(const std::vector<EventRecord>& log) {
  std::vector<EventRecord> sorted = log;
  std::stable_sort(sorted.begin(), sorted.end(), [](const EventRecord& a, const EventRecord& b) {
    return a.flow != b.flow ? a.flow < b.flow : a.ts < b.ts;
  });
  std::vector<std::pair<TimeNs, Segment>> found;  // keyed by start for output order
  std::map<FlowId, Open> open;

  auto start = [&](const EventRecord& r) {
    found.push_back({r.ts, Segment{kDefaultSid, r.flow, {}, {}, 0}});
    open[r.flow] = Open{found.size() - 1, r.ts, std::nullopt};
  };

  for (const auto& r : sorted) {
    auto it = open.find(r.flow);
    switch (r.event) {
      case LogEvent::in_pkt:
        if (it == open.end() || found[it->second.index].second.p > 0) start(r);
        break;
      case LogEvent::indicator:
        if (it == open.end() || found[it->second.index].second.p > 0) start(r);
        found[open[r.flow].index].second.sid = static_cast<int>(r.arg);
        break;
      case LogEvent::out_ready: {
        if (it == open.end()) start(r);
        Open& o = open[r.flow];
        Segment& s = found[o.index].second;
        if (s.p == 0) s.d_i = r.ts - o.start;
        else s.d_s.push_back(r.ts - *o.last_out);
        o.last_out = r.ts;
        ++s.p;
        break;
      }
    }
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Segment> out;
  out.reserve(found.size());
  for (auto& [t, s] : found) out.push_back(std::move(s));
  return out;
}

ScheduleTemplate synthesize(const std::vector<Segment>& segments, const PacerConfig& cfg) {
  std::vector<std::int64_t> d_i, d_s;
  std::uint32_t max_p = 0;
  int sid = segments.empty() ? kDefaultSid : segments.front().sid;
  for (const auto& s : segments) {
    if (s.p == 0) continue;
    d_i.push_back(s.d_i.count());
    for (auto g : s.d_s) d_s.push_back(g.count());
    max_p = std::max(max_p, s.p);
  }
  if (d_i.empty())
    throw InsufficientData("sid " + std::to_string(sid) + " has no segment with a response");
  ScheduleTemplate t;
  t.sid = sid;
  t.initial_delay = std::max(TimeNs(percentile(d_i, 99)), cfg.delta);
  // Bursts with no gaps, or zero gaps, still need a positive slot spacing.
  t.spacing = d_s.empty() ? cfg.epsilon : std::max(TimeNs(percentile(d_s, 90)), TimeNs(1));
  t.count = static_cast<std::uint32_t>((std::uint64_t{max_p} * 11 + 9) / 10);
  return t;
}

ProfileResult profile(const std::vector<EventRecord>& log, const PacerConfig& cfg) {
  std::map<int, std::vector<Segment>> by_sid;
  for (auto& s : segment_logs(log)) by_sid[s.sid].push_back(std::move(s));
  ProfileResult r;
  for (const auto& [sid, segs] : by_sid) {
    try {
      r.templates.push_back(synthesize(segs, cfg));
    } catch (const InsufficientData&) {
      r.skipped.push_back(sid);
    }
  }
  return r;
}

}  // namespace pacer
