#include "pacer/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "pacer/errors.hpp"

namespace pacer {

Corpus read_corpus_csv(std::istream& is) {
  Corpus out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ls(line);
    CorpusObject o;
    std::getline(ls, o.id, ',');
    if (o.id.empty()) throw ParseError(n, "missing id");
    for (std::string cell; std::getline(ls, cell, ',');) {
      std::size_t used = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(cell, &used);
      } catch (const std::logic_error&) {
        throw ParseError(n, "non-numeric size '" + cell + "'");
      }
      if (used != cell.size() || v == 0 || cell[0] == '-')
        throw ParseError(n, "sizes must be positive integers");
      o.segments.push_back(v);
    }
    if (o.segments.empty()) throw ParseError(n, "object '" + o.id + "' has no sizes");
    out.push_back(std::move(o));
  }
  return out;
}

namespace {

std::uint64_t smax(const CorpusObject& o) { return *std::max_element(o.segments.begin(), o.segments.end()); }

std::vector<std::uint64_t> ceiling_of(const Corpus& corpus, const std::vector<std::size_t>& members) {
  std::vector<std::uint64_t> c;
  for (auto i : members) {
    const auto& s = corpus[i].segments;
    if (c.size() < s.size()) c.resize(s.size(), 0);
    for (std::size_t k = 0; k < s.size(); ++k) c[k] = std::max(c[k], s[k]);
  }
  return c;
}

struct Candidate {
  std::size_t l;
  std::uint64_t s;
  long double avg;
  std::vector<std::size_t> set;
};

bool close(long double a, long double b) {
  return std::fabs(a - b) <= 1e-12L * std::max<long double>(1.0L, std::fabs(a));
}

// Lower average first, then the larger set, then the smaller <l, s>.
bool better(const Candidate& a, const Candidate& b) {
  if (!close(a.avg, b.avg)) return a.avg < b.avg;
  if (a.set.size() != b.set.size()) return a.set.size() > b.set.size();
  return std::pair(a.l, a.s) < std::pair(b.l, b.s);
}

std::optional<Candidate> best_round(const Corpus& corpus, const std::vector<std::size_t>& left,
                                    std::size_t c) {
  std::vector<std::size_t> lengths;
  for (auto i : left) lengths.push_back(corpus[i].segments.size());
  std::sort(lengths.begin(), lengths.end());
  lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());

  std::optional<Candidate> best;
  for (auto l : lengths) {
    std::vector<std::size_t> pool;
    for (auto i : left)
      if (corpus[i].segments.size() <= l) pool.push_back(i);
    std::stable_sort(pool.begin(), pool.end(),
                     [&](std::size_t a, std::size_t b) { return smax(corpus[a]) < smax(corpus[b]); });
    // sum over members and segments of ceil_k / s_kj, kept as sum_k ceil_k * inv_k
    std::vector<std::uint64_t> ceil(l, 0);
    std::vector<long double> inv(l, 0.0L);
    long double weighted = 0.0L;
    std::uint64_t seg_total = 0;
    for (std::size_t p = 0; p < pool.size(); ++p) {
      const auto& segs = corpus[pool[p]].segments;
      for (std::size_t k = 0; k < segs.size(); ++k) {
        weighted -= static_cast<long double>(ceil[k]) * inv[k];
        ceil[k] = std::max(ceil[k], segs[k]);
        inv[k] += 1.0L / static_cast<long double>(segs[k]);
        weighted += static_cast<long double>(ceil[k]) * inv[k];
      }
      seg_total += segs.size();
      const std::uint64_t s = smax(corpus[pool[p]]);
      const bool group_end = p + 1 == pool.size() || smax(corpus[pool[p + 1]]) != s;
      if (!group_end || p + 1 < c) continue;
      Candidate cand{l, s, (weighted - static_cast<long double>(seg_total)) / (p + 1),
                     {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(p + 1)}};
      if (!best || better(cand, *best)) best = std::move(cand);
    }
  }
  return best;
}

}  // namespace

Clustering cluster_videos(const Corpus& corpus, std::size_t c) {
  if (c < 1) c = 1;
  Clustering out;
  out.c_min = c;
  std::vector<std::size_t> left(corpus.size());
  for (std::size_t i = 0; i < left.size(); ++i) left[i] = i;

  while (!left.empty()) {
    auto best = best_round(corpus, left, c);
    if (!best) {
      if (out.clusters.empty()) {
        out.clusters.push_back({left, ceiling_of(corpus, left), 0});
      } else {
        Cluster& prev = out.clusters.back();
        prev.members.insert(prev.members.end(), left.begin(), left.end());
        prev.merged = left.size();
        prev.ceiling = ceiling_of(corpus, prev.members);
      }
      break;
    }
    std::vector<std::size_t> members = best->set;
    std::sort(members.begin(), members.end());
    std::vector<std::size_t> rest;
    std::set_difference(left.begin(), left.end(), members.begin(), members.end(),
                        std::back_inserter(rest));
    out.clusters.push_back({members, ceiling_of(corpus, members), 0});
    left = std::move(rest);
  }
  return out;
}

Clustering cluster_documents(const Corpus& corpus, std::size_t c) {
  for (const auto& o : corpus)
    if (o.segments.size() != 1) throw ConfigError("document '" + o.id + "' has several sizes");
  return cluster_videos(corpus, c);
}

Clustering cluster_documents(const std::vector<std::uint64_t>& sizes, std::size_t c) {
  Corpus corpus;
  for (std::size_t i = 0; i < sizes.size(); ++i) corpus.push_back({std::to_string(i), {sizes[i]}});
  return cluster_documents(corpus, c);
}

std::uint64_t next_pow2(std::uint64_t x) {
  if (x <= 1) return 1;
  if (x > (1ull << 63)) throw ConfigError("size too large to round to a power of two");
  std::uint64_t p = 1;
  while (p < x) p <<= 1;
  return p;
}

namespace {

template <class F>
Clustering round_each(const Corpus& corpus, F&& up) {
  std::map<std::vector<std::uint64_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::vector<std::uint64_t> c;
    for (auto s : corpus[i].segments) c.push_back(up(s));
    groups[c].push_back(i);
  }
  Clustering out;
  for (auto& [ceil, members] : groups) out.clusters.push_back({members, ceil, 0});
  out.c_min = 1;
  return out;
}

}  // namespace

Clustering round_pow2(const Corpus& corpus) { return round_each(corpus, next_pow2); }

Clustering round_multiple(const Corpus& corpus, std::uint64_t L) {
  if (L < 1) throw ConfigError("L must be >= 1");
  return round_each(corpus, [L](std::uint64_t s) { return (s + L - 1) / L * L; });
}

OverheadReport overhead(const Clustering& cl, const Corpus& corpus, bool mtu_round, std::uint32_t mtu) {
  OverheadReport r;
  std::size_t objects = 0;
  long double total = 0;
  r.c_min_actual = cl.clusters.empty() ? 0 : SIZE_MAX;
  for (const auto& c : cl.clusters) {
    std::vector<std::uint64_t> ceil = c.ceiling;
    if (mtu_round)
      for (auto& x : ceil) x = (x + mtu - 1) / mtu * mtu;
    r.c_min_actual = std::min(r.c_min_actual, c.members.size());
    if (c.members.size() == 1) ++r.n1;
    for (auto i : c.members) {
      const auto& segs = corpus.at(i).segments;
      if (segs.size() > ceil.size()) throw ConfigError("ceiling shorter than a member");
      long double oh = 0;
      for (std::size_t k = 0; k < ceil.size(); ++k) {
        if (k < segs.size()) {
          if (ceil[k] < segs[k]) throw ConfigError("ceiling does not dominate a member");
          oh += static_cast<long double>(ceil[k] - segs[k]) / static_cast<long double>(segs[k]);
          r.pad_bytes += ceil[k] - segs[k];
        } else {
          r.pad_bytes += ceil[k];
          ++r.missing_segments;
        }
      }
      total += oh;
      r.max_oh = std::max(r.max_oh, static_cast<double>(oh));
      ++objects;
    }
  }
  r.avg_oh = objects ? static_cast<double>(total / objects) : 0.0;
  return r;
}

void write_clustering_jsonl(std::ostream& os, const Clustering& cl, const Corpus& corpus) {
  for (std::size_t i = 0; i < cl.clusters.size(); ++i) {
    nlohmann::json j;
    j["cluster_index"] = i;
    auto ids = nlohmann::json::array();
    for (auto m : cl.clusters[i].members) ids.push_back(corpus.at(m).id);
    j["member_ids"] = std::move(ids);
    j["ceiling"] = cl.clusters[i].ceiling;
    os << j.dump() << '\n';
  }
}

void write_report_csv(std::ostream& os, const OverheadReport& r, bool header) {
  if (header) os << "c_min,n1,avg_oh,max_oh,pad_bytes,missing_segments\n";
  os << r.c_min_actual << ',' << r.n1 << ',' << r.avg_oh << ',' << r.max_oh << ',' << r.pad_bytes
     << ',' << r.missing_segments << '\n';
}

}  // namespace pacer
