// Acceptance suite: end-to-end checks of the solvers, bounds, and the
// outage engine at desk scale. Each criterion prints one PASS/FAIL line;
// the exit code is the number of failed criteria.
//
// Environment knobs:
//   RELAY_ACCEPT_TRIALS   Monte Carlo trials per SNR point for the sweep
//                         criterion (default 100000).
//   RELAY_ACCEPT_SAMPLES  samples per point for the diversity-slope
//                         criterion (default 200000).
//   RELAY_ACCEPT_WORKERS  worker threads (default: hardware concurrency).
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "relay/bounds.hpp"
#include "relay/capregion.hpp"
#include "relay/fo_solver.hpp"
#include "relay/netmodel.hpp"
#include "relay/protocols.hpp"
#include "relay/simkit.hpp"
#include "relay/three_node.hpp"

using namespace relay;

namespace {

int g_failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %s — %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

long env_long(const char* name, long fallback) {
  const char* v = std::getenv(name);
  return v ? std::atol(v) : fallback;
}

int env_workers() {
  const long w = env_long("RELAY_ACCEPT_WORKERS", 0);
  if (w > 0) return static_cast<int>(w);
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void parallel_for(long n, int workers, const std::function<void(long)>& fn) {
  if (workers <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  auto worker = [&]() {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

NetworkInstance draw_uniform(int n, double snr, std::uint64_t seed, std::uint64_t stream) {
  SubstreamRng rng(seed, stream);
  return make_instance(uniform_means(n), snr, rng);
}

// --- criterion 1: three-node analytic agreement ---------------------------

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const int workers = env_workers();

  std::vector<double> diff_a(1000, 0.0);
  parallel_for(1000, workers, [&](long i) {
    const double snr = i % 3 == 0 ? 1.0 : (i % 3 == 1 ? 10.0 : 100.0);
    const auto net = draw_uniform(3, snr, 1001, i);
    const double analytic =
        solve_three_node(net.gains(0, 2), net.gains(0, 1), net.gains(1, 2), snr).rate;
    diff_a[i] = std::abs(solve_fo(FoProblem{net, false, std::nullopt}).rate - analytic);
  });
  double worst_a = 0.0;
  for (double d : diff_a) worst_a = std::max(worst_a, d);

  std::vector<double> diff_b(100, 0.0);
  parallel_for(100, workers, [&](long i) {
    SubstreamRng rng(1002, i);
    const double zsd = rng.next_exponential(1.0);
    const double zsr = rng.next_exponential(1.0);
    const double zrd = rng.next_exponential(1.0);
    const double snr = i % 3 == 0 ? 1.0 : (i % 3 == 1 ? 10.0 : 100.0);
    const double got = solve_three_node(zsd, zsr, zrd, snr).rate;
    diff_b[i] = std::abs(got - test::three_node_grid_rate(zsd, zsr, zrd, snr));
  });
  double worst_b = 0.0;
  for (double d : diff_b) worst_b = std::max(worst_b, d);

  const double elapsed = seconds_since(t0);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "max |fo - analytic| = %.2e (tol 1e-3, 1000 draws); max |analytic - grid| = %.2e "
                "(tol 1e-3, 100 draws); %.0f s (budget 300 s)",
                worst_a, worst_b, elapsed);
  report("criterion 1: three-node analytic agreement", worst_a <= 1e-3 && worst_b <= 1e-3 &&
                                                           elapsed < 300.0,
         buf);
}

// --- criterion 2: cut-reduction equivalence --------------------------------

void criterion2() {
  const int workers = env_workers();
  std::vector<double> diffs(120, 0.0);
  parallel_for(120, workers, [&](long i) {
    const int n = i < 100 ? 4 : 5;
    const auto net = draw_uniform(n, i % 2 ? 4.0 : 25.0, 2001, i);
    const double reduced = solve_fo(FoProblem{net, false, std::nullopt}).rate;
    const double full = solve_fo_fullcuts(FoProblem{net, false, std::nullopt}).rate;
    diffs[i] = std::abs(reduced - full);
  });
  double worst = 0.0;
  for (double d : diffs) worst = std::max(worst, d);
  char buf[128];
  std::snprintf(buf, sizeof buf, "max |full-cut - reduced| = %.2e (tol 1e-4, 100 + 20 draws)",
                worst);
  report("criterion 2: cut-reduction equivalence", worst <= 1e-4, buf);
}

// --- criterion 3: dominance chain ------------------------------------------

void criterion3() {
  const int workers = env_workers();
  std::atomic<long> violations{0};
  std::vector<double> worst_gap(2000, 0.0);
  parallel_for(2000, workers, [&](long i) {
    const int n = i < 1000 ? 4 : 5;
    const double snr = (i % 4 + 1) * 7.0;
    const auto net = draw_uniform(n, snr, 3001, i);
    const double d = direct_transmission(net).rate;
    const double g = gls(net).rate;
    const double f = solve_fo(FoProblem{net, false, std::nullopt}).rate;
    const double b = cutset_upper_rate(net).rate;
    if (d > g + 1e-5 || g > f + 1e-5 || f > b + 1e-5) violations.fetch_add(1);
    worst_gap[i] = std::max({d - g, g - f, f - b});
  });
  double worst = -1e9;
  for (double d : worst_gap) worst = std::max(worst, d);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%ld violations over 2000 draws (N=4 and N=5), worst margin = %.2e (slack 1e-5)",
                violations.load(), worst);
  report("criterion 3: dominance chain direct <= gls <= fo <= bound", violations.load() == 0, buf);
}

// --- criterion 4: destination-MA-cut outage bound ---------------------------

void criterion4() {
  double worst_rel = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double a = 1.0 + (i % 4);
    const double x = 0.08 * i;
    const double got = regularized_lower_gamma(a, x);
    const double want = test::regularized_gamma_quadrature(a, x);
    if (want > 0.0) worst_rel = std::max(worst_rel, std::abs(got - want) / want);
  }

  bool wilson_ok = true;
  std::string detail;
  for (int n : {3, 4, 5}) {
    for (double x : {0.1, 0.5, 1.0}) {
      const long trials = 100000;
      long hits = 0;
      for (long t = 0; t < trials; ++t) {
        SubstreamRng rng(4001 + n, static_cast<std::uint64_t>(x * 1000) * 1000000 + t);
        double sum = 0.0;
        for (int k = 0; k < n - 1; ++k) sum += rng.next_exponential(1.0);
        if (sum < x) ++hits;
      }
      const double analytic = regularized_lower_gamma(n - 1, x);
      const auto ci = wilson95(hits, trials);
      if (!(ci.lo <= analytic && analytic <= ci.hi)) {
        wilson_ok = false;
        detail += " miss(N=" + std::to_string(n) + ",x=" + std::to_string(x) + ")";
      }
    }
  }
  char buf[224];
  std::snprintf(buf, sizeof buf,
                "gamma vs quadrature: max rel err = %.2e (tol 1e-10); Monte Carlo within Wilson at "
                "9/9 grid combos%s",
                worst_rel, detail.c_str());
  report("criterion 4: analytic MA-cut outage bound", worst_rel <= 1e-10 && wilson_ok, buf);
}

// --- criterion 5: figure-shape reproduction ---------------------------------

const OutageCurve* find_curve(const std::vector<OutageCurve>& curves, const std::string& proto,
                              double rate_bits) {
  for (const auto& c : curves)
    if (c.protocol == proto && std::abs(c.rate_bits - rate_bits) < 1e-9) return &c;
  return nullptr;
}

void criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  Experiment exp;
  exp.n_nodes = 4;
  exp.mean_gains = uniform_means(4);
  exp.protocols = {ProtocolId::Direct, ProtocolId::MaxMinSel, ProtocolId::Gls, ProtocolId::Fo,
                   ProtocolId::CutSetBound};
  exp.analytic_lower = true;
  exp.rates_bits = {1.0, 6.0};
  for (double s = 0.0; s <= 40.0 + 1e-9; s += 2.5) exp.snr_db.push_back(s);
  exp.trials = env_long("RELAY_ACCEPT_TRIALS", 100000);
  exp.seed = 5001;
  exp.workers = env_workers();
  const auto curves = run_experiment(exp);
  emit_csv(curves, "acceptance_results.csv");

  char buf[256];
  // (a) GLS within 1.0 +- 0.5 dB of FO at outage 1e-3, both rates.
  for (double rate : {1.0, 6.0}) {
    const auto fo = snr_db_at_outage(*find_curve(curves, "fo", rate), 1e-3);
    const auto gl = snr_db_at_outage(*find_curve(curves, "gls", rate), 1e-3);
    const bool have = fo.has_value() && gl.has_value();
    const double gap = have ? *gl - *fo : 0.0;
    std::snprintf(buf, sizeof buf, "gap = %.2f dB at P=1e-3, R=%g bits (window [0.5, 1.5])",
                  have ? gap : -1.0, rate);
    report(rate == 1.0 ? "criterion 5a: GLS-FO gap (R=1)" : "criterion 5a: GLS-FO gap (R=6)",
           have && gap >= 0.5 && gap <= 1.5, buf);
  }
  // (b) max-min selection worse than GLS by > 8 dB at outage 7e-2 for R=6.
  {
    const auto mm = snr_db_at_outage(*find_curve(curves, "maxmin", 6.0), 7e-2);
    const auto gl = snr_db_at_outage(*find_curve(curves, "gls", 6.0), 7e-2);
    const bool have = mm.has_value() && gl.has_value();
    const double gap = have ? *mm - *gl : 0.0;

    // Reference: the same selection rule without its direct-transmission
    // fallback. At this rate the fallback is what the baseline rides on, so
    // the two variants sit far apart.
    OutageCurve pure;
    const double rn = bits_to_nats(6.0);
    for (double db = 25.0; db <= 50.0 + 1e-9; db += 2.5) {
      const double snr = db_to_linear(db);
      const long trials = 40000;
      long outages = 0;
      for (long t = 0; t < trials; ++t) {
        const auto net = draw_uniform(4, snr, 5002, static_cast<std::uint64_t>(db * 10) * 100000 + t);
        int best = 1;
        double best_min = -1.0;
        for (int k = 1; k <= 2; ++k) {
          const double m = std::min(net.gains(0, k), net.gains(k, 3));
          if (m > best_min) {
            best_min = m;
            best = k;
          }
        }
        const double r = 0.5 * std::min(capacity(net.gains(0, best) * snr),
                                        capacity((net.gains(0, 3) + net.gains(best, 3)) * snr));
        if (r < rn) ++outages;
      }
      OutagePoint pt;
      pt.snr_db = db;
      pt.p_hat = static_cast<double>(outages) / trials;
      pure.points.push_back(pt);
    }
    const auto pure_at = snr_db_at_outage(pure, 7e-2);
    const double pure_gap = pure_at && gl ? *pure_at - *gl : -1.0;
    std::snprintf(buf, sizeof buf,
                  "gap = %.2f dB at P=7e-2, R=6 bits (required > 8); the direct fallback holds the "
                  "baseline at the direct curve here — without it the gap is %.2f dB",
                  have ? gap : -1.0, pure_gap);
    report("criterion 5b: max-min selection penalty", have && gap > 8.0, buf);
  }
  // (c) FO within 2.14 +- 1 dB of the cut-set bound at outage 1e-3 for R=1.
  {
    const auto fo = snr_db_at_outage(*find_curve(curves, "fo", 1.0), 1e-3);
    const auto bd = snr_db_at_outage(*find_curve(curves, "bound", 1.0), 1e-3);
    const bool have = fo.has_value() && bd.has_value();
    const double gap = have ? *fo - *bd : 0.0;
    std::snprintf(buf, sizeof buf, "gap = %.2f dB at P=1e-3, R=1 bit (window [1.14, 3.14])",
                  have ? gap : -1.0);
    report("criterion 5c: FO to cut-set-bound gap", have && gap >= 1.14 && gap <= 3.14, buf);
  }
  std::printf("    (sweep: %ld trials/point, %.0f s, results in acceptance_results.csv)\n",
              exp.trials, seconds_since(t0));
}

// --- criterion 6: diversity slopes ------------------------------------------

void criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  const long samples = env_long("RELAY_ACCEPT_SAMPLES", 200000);
  const double rate = bits_to_nats(0.5);
  const std::vector<double> grid{25.0, 27.5, 30.0, 32.5, 35.0};
  OutageCurve fo, gl, direct;
  fo.protocol = "fo";
  gl.protocol = "gls";
  direct.protocol = "direct";
  for (double db : grid) {
    const auto tails = estimate_outage_tail(
        4, uniform_means(4), {ProtocolId::Fo, ProtocolId::Gls, ProtocolId::Direct}, rate,
        db_to_linear(db), samples, 6001 + static_cast<std::uint64_t>(db * 10), env_workers());
    auto push = [&](OutageCurve& c, ProtocolId id) {
      OutagePoint pt;
      pt.snr_db = db;
      pt.p_hat = tails.at(id).p_hat;
      c.points.push_back(pt);
    };
    push(fo, ProtocolId::Fo);
    push(gl, ProtocolId::Gls);
    push(direct, ProtocolId::Direct);
  }
  const double s_fo = estimate_dmt_slope(fo, 25.0, 35.0);
  const double s_gls = estimate_dmt_slope(gl, 25.0, 35.0);
  const double s_dir = estimate_dmt_slope(direct, 25.0, 35.0);
  char buf[224];
  std::snprintf(buf, sizeof buf,
                "slopes over 25-35 dB at R=0.5 bits: fo %.2f, gls %.2f (window [2.4, 3.3]); "
                "direct %.2f (window [0.8, 1.2]); %ld samples/point, %.0f s",
                s_fo, s_gls, s_dir, samples, seconds_since(t0));
  report("criterion 6: diversity-slope estimates",
         s_fo >= 2.4 && s_fo <= 3.3 && s_gls >= 2.4 && s_gls <= 3.3 && s_dir >= 0.8 &&
             s_dir <= 1.2,
         buf);
}

// --- criterion 7: property suites -------------------------------------------

void criterion7() {
  bool cap_ok = true;
  {
    SubstreamRng rng(7001, 0);
    for (int i = 0; i < 10000 && cap_ok; ++i) {
      Matrix z(4, 4, 0.0);
      for (int k = 1; k < 4; ++k) z(0, k) = rng.next_exponential(1.0) + 1e-6;
      const double t = 0.3 + 0.7 * rng.next_unit();
      auto d = [&](double x1, double x2, double x3) {
        return BcDemand{0, {{1, x1}, {2, x2}, {3, x3}}, t};
      };
      const double a1 = rng.next_unit(), a2 = rng.next_unit(), a3 = rng.next_unit();
      const double b1 = rng.next_unit(), b2 = rng.next_unit(), b3 = rng.next_unit();
      const double fa = bc_min_snr(d(a1, a2, a3), z);
      const double fb = bc_min_snr(d(b1, b2, b3), z);
      const double fm = bc_min_snr(d(0.5 * (a1 + b1), 0.5 * (a2 + b2), 0.5 * (a3 + b3)), z);
      cap_ok = fm <= 0.5 * (fa + fb) + 1e-9 * (1.0 + fa + fb) &&
               bc_min_snr(d(a1 + 0.05, a2, a3), z) > fa;
      // decode order: descending gains never lose
      const double z1 = z(0, 1), z2 = z(0, 2);
      const double hi = std::max(z1, z2), lo = std::min(z1, z2);
      const double rhi = z1 >= z2 ? a1 : a2, rlo = z1 >= z2 ? a2 : a1;
      cap_ok = cap_ok && bc_cascade_min_snr({{hi, rhi}, {lo, rlo}}) <=
                             bc_cascade_min_snr({{lo, rlo}, {hi, rhi}}) + 1e-9;
    }
  }
  report("criterion 7a: capacity-region properties (10^4 instances)", cap_ok,
         cap_ok ? "monotone, convex, order-optimal" : "violation found");

  bool uni_ok = true;
  {
    SubstreamRng rng(7002, 0);
    for (int i = 0; i < 10000 && uni_ok; ++i) {
      const double zsd = rng.next_exponential(1.0);
      const double zsr = zsd + rng.next_exponential(1.0) + 1e-9;
      const double zrd = rng.next_exponential(1.0);
      const double snr = std::exp(4.0 * rng.next_unit());
      const double lim = t2_max(zsd, zsr, zrd, snr);
      double prev = rate_given_t2(zsd, zsr, zrd, snr, 0.0).rate;
      bool falling = false;
      for (int k = 1; k <= 200 && uni_ok; ++k) {
        const double v = rate_given_t2(zsd, zsr, zrd, snr, lim * k / 200).rate;
        if (v < prev - 1e-11) falling = true;
        else if (falling && v > prev + 1e-11) uni_ok = false;
        prev = v;
      }
    }
  }
  report("criterion 7b: three-node unimodality scan (10^4 instances)", uni_ok,
         uni_ok ? "single interior maximum everywhere" : "multimodal instance found");

  bool det_ok = true;
  {
    Experiment exp;
    exp.n_nodes = 4;
    exp.mean_gains = uniform_means(4);
    exp.protocols = {ProtocolId::Direct, ProtocolId::Gls, ProtocolId::Fo};
    exp.rates_bits = {1.0};
    exp.snr_db = {5.0, 15.0};
    exp.trials = 500;
    exp.seed = 7003;
    std::vector<std::vector<OutageCurve>> runs;
    for (int w : {1, 2, 8}) {
      exp.workers = w;
      runs.push_back(run_experiment(exp));
    }
    for (std::size_t r = 1; r < runs.size(); ++r)
      for (std::size_t i = 0; i < runs[0].size(); ++i)
        for (std::size_t j = 0; j < runs[0][i].points.size(); ++j)
          det_ok = det_ok && runs[r][i].points[j].outages == runs[0][i].points[j].outages &&
                   runs[r][i].points[j].p_hat == runs[0][i].points[j].p_hat;
  }
  report("criterion 7c: seed determinism across 1/2/8 workers", det_ok,
         det_ok ? "bit-identical estimates" : "worker count changed the result");

  bool wit_ok = true;
  std::string wit_detail = "50 witnesses re-validated by the independent checker";
  {
    for (int i = 0; i < 50 && wit_ok; ++i) {
      const auto net = draw_uniform(4, (i % 5 + 1) * 6.0, 7004, i);
      const auto res = solve_fo(FoProblem{net, false, std::nullopt});
      const auto rep = validate_rate_result(net, res);
      bool cons_ok = true;
      for (double r : conservation_residuals(res.flows))
        if (std::abs(r) > 1e-7) cons_ok = false;
      if (!rep.ok || !cons_ok) {
        wit_ok = false;
        wit_detail = rep.detail.empty() ? "conservation residual above 1e-7" : rep.detail;
      }
    }
  }
  report("criterion 7d: witness re-validation", wit_ok, wit_detail);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string which = argc > 1 ? argv[1] : "all";
  auto want = [&](const char* name) { return which == "all" || which == name; };
  if (want("1")) criterion1();
  if (want("2")) criterion2();
  if (want("3")) criterion3();
  if (want("4")) criterion4();
  if (want("5")) criterion5();
  if (want("6")) criterion6();
  if (want("7")) criterion7();
  if (g_failures == 0)
    std::printf("acceptance: all selected criteria passed\n");
  else
    std::printf("acceptance: %d criterion check(s) failed\n", g_failures);
  return g_failures;
}
