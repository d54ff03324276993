#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pacer {

struct CorpusObject {
  std::string id;
  std::vector<std::uint64_t> segments;  // one entry for a document
};
using Corpus = std::vector<CorpusObject>;

// CSV `id,size1[,size2,...]`; sizes must be positive.
Corpus read_corpus_csv(std::istream& is);

struct Cluster {
  std::vector<std::size_t> members;  // corpus indices; merged remainder last
  std::vector<std::uint64_t> ceiling;
  std::size_t merged = 0;  // trailing members folded in from an undersized remainder
};

struct Clustering {
  std::vector<Cluster> clusters;
  std::size_t c_min = 1;
};

// Greedy rounds: among <l, s> whose dominated set of unclustered videos has at
// least c members, take the set with the lowest average relative padding.
Clustering cluster_videos(const Corpus& corpus, std::size_t c);
Clustering cluster_documents(const Corpus& corpus, std::size_t c);
Clustering cluster_documents(const std::vector<std::uint64_t>& sizes, std::size_t c);

Clustering round_pow2(const Corpus& corpus);
Clustering round_multiple(const Corpus& corpus, std::uint64_t L);

std::uint64_t next_pow2(std::uint64_t x);

struct OverheadReport {
  double avg_oh = 0;
  double max_oh = 0;
  std::size_t n1 = 0;
  std::size_t c_min_actual = 0;
  // Relative overhead only covers segments an object has. Padding for
  // segments it lacks is counted here, in bytes, together with all other padding.
  std::uint64_t pad_bytes = 0;
  std::uint64_t missing_segments = 0;
};

OverheadReport overhead(const Clustering& cl, const Corpus& corpus, bool mtu_round = false,
                        std::uint32_t mtu = 1500);

void write_clustering_jsonl(std::ostream& os, const Clustering& cl, const Corpus& corpus);
void write_report_csv(std::ostream& os, const OverheadReport& r, bool header = true);

}  // namespace pacer
