#include <doctest.h>

#include <json.hpp>
#include <random>
#include <sstream>

#include "pacer/cluster.hpp"
#include "pacer/errors.hpp"

using namespace pacer;

namespace {

Corpus docs(const std::vector<std::uint64_t>& sizes) {
  Corpus c;
  for (std::size_t i = 0; i < sizes.size(); ++i) c.push_back({"d" + std::to_string(i), {sizes[i]}});
  return c;
}

std::vector<std::uint64_t> ceilings(const Clustering& cl) {
  std::vector<std::uint64_t> out;
  for (const auto& c : cl.clusters) out.push_back(c.ceiling.at(0));
  return out;
}

}  // namespace

TEST_CASE("documents split into tight pairs") {
  const auto cl = cluster_documents(std::vector<std::uint64_t>{10, 11, 100, 101, 1000, 1001}, 2);
  CHECK(ceilings(cl) == std::vector<std::uint64_t>{11, 101, 1001});
  CHECK(cl.clusters[1].members == std::vector<std::size_t>{2, 3});
}

TEST_CASE("an undersized remainder joins the last cluster") {
  const auto cl = cluster_documents(std::vector<std::uint64_t>{10, 11, 12}, 2);
  REQUIRE(cl.clusters.size() == 1);
  CHECK(cl.clusters[0].members == std::vector<std::size_t>{0, 1, 2});
  CHECK(cl.clusters[0].merged == 1);
  CHECK(cl.clusters[0].ceiling == std::vector<std::uint64_t>{12});
}

TEST_CASE("c larger than the corpus gives one cluster") {
  const auto cl = cluster_documents(std::vector<std::uint64_t>{3, 9, 27}, 5);
  REQUIRE(cl.clusters.size() == 1);
  CHECK(cl.clusters[0].members.size() == 3);
  CHECK(cl.clusters[0].ceiling == std::vector<std::uint64_t>{27});
}

TEST_CASE("equal sizes stay together") {
  const auto cl = cluster_documents(std::vector<std::uint64_t>{10, 10, 10}, 1);
  REQUIRE(cl.clusters.size() == 1);
  CHECK(overhead(cl, docs({10, 10, 10})).avg_oh == 0.0);
}

TEST_CASE("documents must have one size") {
  Corpus c{{"v", {1, 2}}};
  CHECK_THROWS_AS(cluster_documents(c, 1), ConfigError);
}

TEST_CASE("shorter videos are padded with whole segments") {
  Corpus c{{"a", {5, 5}}, {"b", {5}}};
  const auto cl = cluster_videos(c, 2);
  REQUIRE(cl.clusters.size() == 1);
  CHECK(cl.clusters[0].ceiling == std::vector<std::uint64_t>{5, 5});
  const auto r = overhead(cl, c);
  CHECK(r.avg_oh == 0.0);
  CHECK(r.missing_segments == 1);
  CHECK(r.pad_bytes == 5);
}

TEST_CASE("overhead report") {
  const auto corpus = docs({100, 150, 400});
  Clustering cl;
  cl.clusters.push_back({{0, 1}, {150}, 0});
  cl.clusters.push_back({{2}, {400}, 0});
  const auto r = overhead(cl, corpus);
  CHECK(r.n1 == 1);
  CHECK(r.c_min_actual == 1);
  CHECK(r.max_oh == doctest::Approx(0.5));
  CHECK(r.avg_oh == doctest::Approx(0.5 / 3));
  CHECK(r.pad_bytes == 50);

  const auto m = overhead(cl, corpus, true, 128);
  CHECK(m.pad_bytes == (256 - 100) + (256 - 150) + (512 - 400));

  Clustering bad;
  bad.clusters.push_back({{0, 1}, {120}, 0});
  CHECK_THROWS_AS(overhead(bad, corpus), ConfigError);
}

TEST_CASE("rounding baselines") {
  CHECK(next_pow2(1) == 1);
  CHECK(next_pow2(5) == 8);
  CHECK(next_pow2(1024) == 1024);
  CHECK(next_pow2(1025) == 2048);
  const auto corpus = docs({5, 7, 8, 9, 1000});
  const auto p = round_pow2(corpus);
  CHECK(p.clusters.size() == 3);
  CHECK(overhead(p, corpus).max_oh < 1.0);
  const auto m = round_multiple(corpus, 10);
  CHECK(ceilings(m) == std::vector<std::uint64_t>{10, 1000});
  CHECK_THROWS_AS(round_multiple(corpus, 0), ConfigError);
}

TEST_CASE("property: greedy clusters partition the corpus and dominate their members") {
  std::mt19937_64 rng(23);
  for (int iter = 0; iter < 300; ++iter) {
    Corpus corpus;
    const std::size_t n = 1 + rng() % 25;
    for (std::size_t i = 0; i < n; ++i) {
      CorpusObject o{"o" + std::to_string(i), {}};
      for (std::size_t k = 0, len = 1 + rng() % 4; k < len; ++k) o.segments.push_back(1 + rng() % 5000);
      corpus.push_back(o);
    }
    const std::size_t c = 1 + rng() % 6;
    const auto cl = cluster_videos(corpus, c);
    std::vector<int> seen(n, 0);
    for (const auto& k : cl.clusters) {
      if (n >= c) REQUIRE(k.members.size() >= c);
      for (auto i : k.members) {
        ++seen.at(i);
        const auto& s = corpus[i].segments;
        REQUIRE(s.size() <= k.ceiling.size());
        for (std::size_t j = 0; j < s.size(); ++j) REQUIRE(k.ceiling[j] >= s[j]);
      }
    }
    for (auto x : seen) REQUIRE(x == 1);
  }
}

TEST_CASE("corpus CSV") {
  std::stringstream ok("# id,sizes\nv1,10,20\nd2,7\n");
  const auto c = read_corpus_csv(ok);
  REQUIRE(c.size() == 2);
  CHECK(c[0].segments == std::vector<std::uint64_t>{10, 20});
  std::stringstream zero("a,0\n");
  CHECK_THROWS_AS(read_corpus_csv(zero), ParseError);
  std::stringstream text("a,ten\n");
  CHECK_THROWS_AS(read_corpus_csv(text), ParseError);
  std::stringstream none("a\n");
  CHECK_THROWS_AS(read_corpus_csv(none), ParseError);
}

TEST_CASE("clustering JSONL and report CSV") {
  const auto corpus = docs({10, 11, 100, 101});
  const auto cl = cluster_documents(corpus, 2);
  std::stringstream js;
  write_clustering_jsonl(js, cl, corpus);
  std::string line;
  std::size_t n = 0;
  while (std::getline(js, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("cluster_index") == n);
    CHECK(j.at("member_ids").size() == 2);
    ++n;
  }
  CHECK(n == 2);
  std::stringstream csv;
  write_report_csv(csv, overhead(cl, corpus));
  std::getline(csv, line);
  CHECK(line == "c_min,n1,avg_oh,max_oh,pad_bytes,missing_segments");
}
