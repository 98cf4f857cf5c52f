// relayflow: outage sweeps, plot scripts, and self-checks for the relay
// flow-optimization library.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "relay/bounds.hpp"
#include "relay/fo_solver.hpp"
#include "relay/netmodel.hpp"
#include "relay/protocols.hpp"
#include "relay/simkit.hpp"
#include "relay/three_node.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolverBudget = 3;

int run_command(const std::string& config_path, const std::string& out_path, int workers,
                long seed_override, bool have_seed) {
  relay::Experiment exp = relay::experiment_from_file(config_path);
  if (workers >= 0) exp.workers = workers;
  if (have_seed) exp.seed = static_cast<std::uint64_t>(seed_override);
  const auto curves = relay::run_experiment(exp);
  relay::emit_csv(curves, out_path);
  long total_flagged = 0;
  for (const auto& c : curves)
    for (const auto& pt : c.points) total_flagged += pt.flagged;
  std::printf("wrote %zu curves (%zu SNR points each) to %s; flagged trials: %ld\n",
              curves.size(), curves.empty() ? 0 : curves[0].points.size(), out_path.c_str(),
              total_flagged);
  return kExitOk;
}

int curves_command(const std::string& in_path, const std::string& gp_path) {
  const auto curves = relay::parse_csv(in_path);
  std::ofstream out(gp_path, std::ios::binary);
  if (!out) throw relay::ConfigError("cannot open '" + gp_path + "' for writing");
  out << relay::gnuplot_script(curves);
  std::printf("wrote gnuplot script for %zu curves to %s\n", curves.size(), gp_path.c_str());
  return kExitOk;
}

int solve_command(int n, const std::string& means_name, double snr_db, long seed, long stream,
                  bool full_cuts, bool bound, const std::string& dump_path) {
  const relay::Matrix means = relay::means_from_preset(means_name, n);
  relay::SubstreamRng rng(static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(stream));
  const relay::NetworkInstance net =
      relay::make_instance(means, relay::db_to_linear(snr_db), rng);

  const auto direct = relay::direct_transmission(net);
  const auto sel = relay::max_min_selection(net);
  const auto g = relay::gls(net);
  std::printf("direct : %.6f nats (%.6f bits)\n", direct.rate, relay::nats_to_bits(direct.rate));
  std::printf("maxmin : %.6f nats (relay %d)\n", sel.rate, *sel.chosen_relay);
  const std::string gls_detail =
      g.chosen_relay ? "relay " + std::to_string(*g.chosen_relay) : std::string("direct");
  std::printf("gls    : %.6f nats (%s)\n", g.rate, gls_detail.c_str());

  relay::FoProblem problem{net, full_cuts, std::nullopt};
  const auto fo = full_cuts ? relay::solve_fo_fullcuts(problem) : relay::solve_fo(problem);
  std::printf("fo     : %.6f nats (%.6f bits), %d bisections, %d newton steps\n", fo.rate,
              relay::nats_to_bits(fo.rate), fo.diag.iterations, fo.diag.newton_steps);
  if (bound) {
    const auto ub = relay::cutset_upper_rate(net);
    std::printf("bound  : %.6f nats%s\n", ub.rate, ub.fo_fallback ? " (fo fallback)" : "");
  }
  if (!dump_path.empty()) {
    std::ofstream out(dump_path, std::ios::binary);
    if (!out) throw relay::ConfigError("cannot open '" + dump_path + "' for writing");
    out << "{\n\"schedule\": " << relay::schedule_to_json(fo.schedule)
        << ",\n\"allocation\": " << relay::allocation_to_json(fo.flows)
        << ",\n\"program\": " << relay::fo_debug_json(problem, fo.rate) << "\n}\n";
    std::printf("wrote solver dump to %s\n", dump_path.c_str());
  }
  return kExitOk;
}

struct CheckRunner {
  int failures = 0;
  void operator()(const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.empty() ? "" : " — ",
                detail.c_str());
    if (!ok) ++failures;
  }
};

int verify_command() {
  using namespace relay;
  CheckRunner check;
  char buf[160];

  {  // capacity spot values
    const bool ok = capacity(0.0) == 0.0 &&
                    std::abs(capacity(std::exp(1.0) - 1.0) - 1.0) < 1e-14 &&
                    std::abs(capacity(10.0) - 2.3978952727983707) < 1e-13;
    check("capacity spot values", ok);
  }
  {  // t2_max closed forms agree
    double worst = 0.0;
    SubstreamRng rng(1, 0);
    for (int i = 0; i < 2000; ++i) {
      const double zsd = rng.next_exponential(1.0), zsr = rng.next_exponential(1.0) + 1e-9;
      const double zrd = rng.next_exponential(1.0), snr = std::exp(4.0 * rng.next_unit());
      const double a = t2_max(zsd, zsr, zrd, snr);
      const double alt =
          capacity(zsr * snr) / (capacity(zrd * snr / (1.0 + zsd * snr)) + capacity(zsr * snr));
      worst = std::max(worst, std::abs(a - alt));
    }
    std::snprintf(buf, sizeof buf, "max |diff| = %.2e", worst);
    check("t2_max dual formulas", worst < 1e-12, buf);
  }
  {  // three-node optimum vs a coarse grid over (t2, alpha)
    double worst = 0.0;
    for (int i = 0; i < 6; ++i) {
      SubstreamRng rng(2, i);
      const double zsd = rng.next_exponential(1.0), zsr = rng.next_exponential(1.0);
      const double zrd = rng.next_exponential(1.0);
      const double got = solve_three_node(zsd, zsr, zrd, 10.0).rate;
      double best = 0.0;
      for (int ti = 0; ti <= 200; ++ti)
        for (int aj = 0; aj <= 2000; ++aj) {
          const double t2 = ti / 200.0, abar = aj / 2000.0, t1 = 1.0 - t2;
          double x1 = 0.0, x2 = 0.0;
          if (t1 > 1e-12) {
            if (zsr > zsd) {
              x2 = t1 * std::log1p(zsr * abar * 10.0);
              x1 = t1 * std::log1p(zsd * (1 - abar) * 10.0 / (1.0 + zsd * abar * 10.0));
            } else {
              x1 = t1 * std::log1p(zsd * (1 - abar) * 10.0);
              x2 = t1 * std::log1p(zsr * abar * 10.0 / (1.0 + zsr * (1 - abar) * 10.0));
            }
          }
          const double x2c = std::min(x2, t2 * capacity(zrd * 10.0));
          const double x3 = std::max(
              0.0, std::min(t2 * capacity(zsd * 10.0), t2 * capacity((zsd + zrd) * 10.0) - x2c));
          best = std::max(best, x1 + x2c + x3);
        }
      worst = std::max(worst, std::abs(got - best));
      if (got < best - 1e-9) worst = 1.0;  // solver below a feasible point is a real bug
    }
    std::snprintf(buf, sizeof buf, "max |diff| = %.2e (coarse grid)", worst);
    check("three-node vs grid", worst < 5e-3, buf);
  }
  {  // reduced vs full cut objective
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      SubstreamRng rng(3, i);
      const auto net = make_instance(uniform_means(4), 10.0, rng);
      worst = std::max(worst, std::abs(solve_fo(FoProblem{net, false, std::nullopt}).rate -
                                       solve_fo_fullcuts(FoProblem{net, false, std::nullopt}).rate));
    }
    std::snprintf(buf, sizeof buf, "max |diff| = %.2e", worst);
    check("cut reduction equivalence", worst < 1e-4, buf);
  }
  {  // dominance chain with witness re-validation
    bool ok = true;
    for (int i = 0; i < 30 && ok; ++i) {
      SubstreamRng rng(4, i);
      const auto net = make_instance(uniform_means(4), i % 2 ? 5.0 : 20.0, rng);
      const double d = direct_transmission(net).rate;
      const double g = gls(net).rate;
      const auto fo = solve_fo(FoProblem{net, false, std::nullopt});
      const double b = cutset_upper_rate(net).rate;
      ok = d <= g + 1e-5 && g <= fo.rate + 1e-5 && fo.rate <= b + 1e-5 &&
           validate_rate_result(net, fo).ok;
    }
    check("dominance chain + witness validation (30 draws)", ok);
  }
  {  // gamma closed form and range
    bool ok = std::abs(regularized_lower_gamma(2.0, 1.0) - 0.26424111765711533) < 1e-12;
    double prev = 0.0;
    for (int i = 0; i <= 50 && ok; ++i) {
      const double p = regularized_lower_gamma(3.0, 0.4 * i);
      ok = p >= prev - 1e-15 && p >= 0.0 && p <= 1.0;
      prev = p;
    }
    check("incomplete gamma", ok);
  }
  {  // seed determinism under different worker counts
    Experiment exp;
    exp.n_nodes = 4;
    exp.mean_gains = uniform_means(4);
    exp.protocols = {ProtocolId::Direct, ProtocolId::Gls, ProtocolId::Fo};
    exp.rates_bits = {1.0};
    exp.snr_db = {5.0, 15.0};
    exp.trials = 300;
    exp.seed = 99;
    exp.workers = 1;
    const auto a = run_experiment(exp);
    exp.workers = 4;
    const auto b = run_experiment(exp);
    bool ok = a.size() == b.size();
    for (std::size_t i = 0; ok && i < a.size(); ++i)
      for (std::size_t j = 0; ok && j < a[i].points.size(); ++j)
        ok = a[i].points[j].outages == b[i].points[j].outages;
    check("seed determinism across worker counts", ok);
  }

  std::printf("%s: %d check(s) failed\n", check.failures ? "FAILURE" : "OK", check.failures);
  return check.failures ? kExitCheckFailed : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative relaying outage experiments (FO/GLS protocols and bounds)"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an outage-probability sweep from a JSON config");
  std::string config_path, out_path = "results.csv";
  int workers = -1;
  long seed = 0;
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_path, "output CSV path");
  run->add_option("--workers", workers, "worker threads (0 = hardware)");
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");

  auto* curves = app.add_subcommand("curves", "emit a gnuplot script from a results CSV");
  std::string in_path, gp_path = "curves.gp";
  curves->add_option("--in", in_path, "results CSV")->required();
  curves->add_option("--gnuplot", gp_path, "output gnuplot script");

  auto* solve = app.add_subcommand("solve", "solve one sampled realization and print rates");
  int n_nodes = 4;
  std::string means_name = "uniform";
  double snr_db = 20.0;
  long ssd = 1, stream = 0;
  bool full_cuts = false, with_bound = false;
  std::string dump_path;
  solve->add_option("--n", n_nodes, "node count (>= 3)");
  solve->add_option("--means", means_name, "uniform | caseA | caseB");
  solve->add_option("--snr-db", snr_db, "transmit SNR in dB");
  solve->add_option("--seed", ssd, "sampler seed");
  solve->add_option("--stream", stream, "sampler substream");
  solve->add_flag("--full-cuts", full_cuts, "use the full cut enumeration");
  solve->add_flag("--bound", with_bound, "also compute the cut-set bound");
  solve->add_option("--dump", dump_path, "write schedule/allocation/program JSON here");

  app.add_subcommand("verify", "run the built-in oracle and property checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed())
      return run_command(config_path, out_path, workers, seed, seed_opt->count() > 0);
    if (curves->parsed()) return curves_command(in_path, gp_path);
    if (solve->parsed())
      return solve_command(n_nodes, means_name, snr_db, ssd, stream, full_cuts, with_bound,
                           dump_path);
    return verify_command();
  } catch (const relay::SolverBudgetError& e) {
    std::fprintf(stderr, "solver failure budget exceeded: %s\n", e.what());
    return kExitSolverBudget;
  } catch (const relay::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitCheckFailed;
  }
}
