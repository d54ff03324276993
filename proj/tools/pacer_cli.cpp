#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pacer/cluster.hpp"
#include "pacer/noninterference.hpp"
#include "pacer/profpace.hpp"
#include "pacer/simnet.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kVerifyFailed = 3;

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

template <class F>
auto parse_file(const std::string& path, F&& parse) {
  auto in = open_in(path);
  try {
    return parse(in);
  } catch (const pacer::PacerError& e) {
    throw DataError(path + ": " + e.what());
  }
}

struct ClusterArgs {
  std::string corpus;
  std::size_t cmin = 1;
  std::string algo = "greedy";
  std::uint64_t L = 100;
  bool mtu_round = false;
  std::uint32_t mtu = 1500;
  std::string out_dir = ".";
};

pacer::Clustering run_algo(const std::string& algo, const pacer::Corpus& corpus, std::size_t cmin,
                           std::uint64_t L) {
  if (algo == "pow2") return pacer::round_pow2(corpus);
  if (algo == "multiple") return pacer::round_multiple(corpus, L);
  return pacer::cluster_videos(corpus, cmin);
}

int cmd_cluster(const ClusterArgs& a) {
  const auto corpus = parse_file(a.corpus, pacer::read_corpus_csv);
  if (corpus.empty()) throw DataError(a.corpus + ": corpus is empty");
  if (a.algo == "greedy" && a.cmin > corpus.size())
    throw DataError("--cmin " + std::to_string(a.cmin) + " exceeds corpus size " +
                    std::to_string(corpus.size()));
  const auto cl = run_algo(a.algo, corpus, a.cmin, a.L);
  const auto rep = pacer::overhead(cl, corpus, a.mtu_round, a.mtu);

  auto jsonl = open_out(a.out_dir + "/clustering.jsonl");
  pacer::write_clustering_jsonl(jsonl, cl, corpus);
  auto csv = open_out(a.out_dir + "/report.csv");
  pacer::write_report_csv(csv, rep);

  pacer::write_report_csv(std::cout, rep);
  if (rep.missing_segments > 0)
    std::cout << "note: avg_oh/max_oh cover present segments only; " << rep.missing_segments
              << " missing segments are counted in pad_bytes\n";
  if (a.algo == "pow2") {
    // Per size; a video's summed overhead may exceed 1 even though each segment stays below it.
    double worst = 0;
    for (const auto& c : cl.clusters)
      for (auto i : c.members)
        for (std::size_t k = 0; k < corpus[i].segments.size(); ++k) {
          const auto sz = corpus[i].segments[k];
          worst = std::max(worst, static_cast<double>(c.ceiling[k] - sz) / static_cast<double>(sz));
        }
    std::cout << "check max_size_oh=" << worst << " below_1=" << (worst < 1.0 ? "true" : "false") << '\n';
    if (worst >= 1.0) return kVerifyFailed;
  }
  return kOk;
}

int cmd_report(const ClusterArgs& a, const std::vector<std::size_t>& cmins) {
  const auto corpus = parse_file(a.corpus, pacer::read_corpus_csv);
  if (corpus.empty()) throw DataError(a.corpus + ": corpus is empty");
  std::cout << "technique,c_min,n1,avg_oh,max_oh\n";
  auto row = [&](const std::string& name, const pacer::Clustering& cl) {
    const auto r = pacer::overhead(cl, corpus, a.mtu_round, a.mtu);
    std::cout << name << ',' << r.c_min_actual << ',' << r.n1 << ',' << r.avg_oh << ',' << r.max_oh
              << '\n';
  };
  row("pow2", pacer::round_pow2(corpus));
  row("multiple-" + std::to_string(a.L), pacer::round_multiple(corpus, a.L));
  for (auto c : cmins) {
    if (c > corpus.size()) throw DataError("c_min " + std::to_string(c) + " exceeds corpus size");
    row("greedy-c" + std::to_string(c), pacer::cluster_videos(corpus, c));
  }
  return kOk;
}

int cmd_profile(const std::string& log_path, const std::string& config_path, const std::string& out) {
  const auto log = parse_file(log_path, pacer::read_event_log);
  if (log.empty()) throw DataError(log_path + ": event log is empty");
  pacer::PacerConfig cfg = pacer::PacerConfig::defaults();
  if (!config_path.empty()) cfg = parse_file(config_path, pacer::parse_config);
  const auto res = pacer::profile(log, cfg);
  for (int sid : res.skipped) std::cerr << "warning: sid " << sid << " has no responses; skipped\n";
  if (res.templates.empty()) throw DataError(log_path + ": no sid has enough data");
  // Round-trip through the loader's validation.
  pacer::ScheduleDb check;
  for (const auto& t : res.templates) check.add(t, cfg);
  if (out.empty() || out == "-") {
    pacer::write_schedule_db(std::cout, res.templates);
  } else {
    auto f = open_out(out);
    pacer::write_schedule_db(f, res.templates);
  }
  return kOk;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out, const std::string& log_out) {
  const auto s = parse_file(scenario_path, pacer::parse_scenario);
  pacer::Configuration c = pacer::make_configuration(s, s.secret_seed);
  pacer::ObservationTrace trace;
  try {
    trace = pacer::run(c, s.epochs, pacer::ReferenceEnv(s), pacer::ReferenceGuest(s));
  } catch (const pacer::PacerError& e) {
    throw DataError(std::string("simulation stopped at t=") + std::to_string(c.tg().count()) + ": " +
                    e.what());
  }
  if (out.empty() || out == "-") {
    pacer::write_trace_csv(std::cout, trace);
  } else {
    auto f = open_out(out);
    pacer::write_trace_csv(f, trace);
  }
  if (!log_out.empty()) {
    auto log = c.guest.log;
    std::stable_sort(log.begin(), log.end(),
                     [](const auto& a, const auto& b) { return a.ts < b.ts; });
    auto f = open_out(log_out);
    pacer::write_event_log(f, log);
  }
  return kOk;
}

int cmd_verify(const std::string& scenario_path, std::uint32_t pairs, const std::string& mutant) {
  auto s = parse_file(scenario_path, pacer::parse_scenario);
  if (!mutant.empty()) {
    try {
      s.mutant = pacer::parse_mutant(mutant);
    } catch (const pacer::PacerError& e) {
      throw DataError(e.what());
    }
  }
  bool failed = false, model_error = false;
  for (std::uint32_t i = 0; i < pairs; ++i) {
    const auto v = pacer::run_pair(pacer::nth_pair(s, i));
    std::cout << v.line() << '\n';
    failed |= v.kind == pacer::VerdictKind::fail;
    model_error |= v.kind == pacer::VerdictKind::conformance;
  }
  if (failed) return kVerifyFailed;
  return model_error ? kData : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traffic shaping toolkit: clustering, profiling, simulation, verification"};
  app.require_subcommand(1);

  ClusterArgs ca;
  auto* cluster = app.add_subcommand("cluster", "Cluster a corpus and report padding overhead");
  cluster->add_option("--corpus", ca.corpus, "Corpus CSV (id,size1[,size2,...])")->required();
  cluster->add_option("--cmin", ca.cmin, "Minimum cluster size")->check(CLI::PositiveNumber);
  cluster->add_option("--algo", ca.algo, "greedy | pow2 | multiple")
      ->check(CLI::IsMember({"greedy", "pow2", "multiple"}));
  cluster->add_option("--L", ca.L, "Rounding unit for --algo multiple")->check(CLI::PositiveNumber);
  cluster->add_flag("--mtu-round", ca.mtu_round, "Round ceilings up to MTU multiples");
  cluster->add_option("--mtu", ca.mtu, "MTU used by --mtu-round")->check(CLI::PositiveNumber);
  cluster->add_option("--out-dir", ca.out_dir, "Where clustering.jsonl and report.csv go");

  ClusterArgs ra;
  std::vector<std::size_t> cmins{1, 8};
  auto* report = app.add_subcommand("report", "Overhead table: rounding baselines and greedy clustering");
  report->add_option("--corpus", ra.corpus, "Corpus CSV")->required();
  report->add_option("--cmin", cmins, "Greedy minimum cluster sizes")->delimiter(',');
  report->add_option("--L", ra.L, "Rounding unit")->check(CLI::PositiveNumber);
  report->add_flag("--mtu-round", ra.mtu_round, "Round ceilings up to MTU multiples");
  report->add_option("--mtu", ra.mtu, "MTU used by --mtu-round")->check(CLI::PositiveNumber);

  std::string log_path, config_path, db_out;
  auto* prof = app.add_subcommand("profile", "Synthesize schedule templates from an event log");
  prof->add_option("--log", log_path, "Event log (ts_ns,flow,event,arg)")->required();
  prof->add_option("--config", config_path, "key=value timing config");
  prof->add_option("--out", db_out, "Schedule DB output (default stdout)");

  std::string scenario, trace_out, log_out;
  auto* sim = app.add_subcommand("simulate", "Run one scenario and write the observable trace");
  sim->add_option("--scenario", scenario, "Scenario file (key=value)")->required();
  sim->add_option("--out", trace_out, "Trace CSV output (default stdout)");
  sim->add_option("--event-log", log_out, "Also write the guest event log here");

  std::string vscenario, mutant;
  std::uint32_t pairs = 1;
  auto* ver = app.add_subcommand("verify", "Paired runs with differing secrets; PASS/FAIL per pair");
  ver->add_option("--scenario", vscenario, "Scenario file (key=value)")->required();
  ver->add_option("--pairs", pairs, "Number of secret pairs")->check(CLI::PositiveNumber);
  ver->add_option("--mutant", mutant, "Plant a leak: secret-te, handler-delay-timestamp, "
                                      "pad-len-exposure, secret-sid, dummy-suppression");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*cluster) return cmd_cluster(ca);
    if (*report) return cmd_report(ra, cmins);
    if (*prof) return cmd_profile(log_path, config_path, db_out);
    if (*sim) return cmd_simulate(scenario, trace_out, log_out);
    if (*ver) return cmd_verify(vscenario, pairs, mutant);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const pacer::PacerError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
