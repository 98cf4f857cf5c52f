#include "relay/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "relay/barrier.hpp"

namespace relay {

namespace {

constexpr double kBoundRateTol = kOuterRateTol;

BoundSchedule bound_schedule_impl(int n) {
  BoundSchedule sched;
  const int dest = n - 1;
  auto range = [](int lo, int hi_excl, int skip = -1) {
    std::vector<int> v;
    for (int i = lo; i < hi_excl; ++i)
      if (i != skip) v.push_back(i);
    return v;
  };
  sched.slots.push_back({{0}, range(1, n), 0.0});  // source BC
  if (n == 4) {
    sched.slots.push_back({{0, 1}, {2, 3}, 0.0});
    sched.slots.push_back({{0, 2}, {1, 3}, 0.0});
  } else {  // n == 5: six all-transmit/all-listen intermediate slots
    for (int i = 0; i < 6; ++i) sched.slots.push_back({range(0, dest), range(1, n), 0.0});
  }
  sched.slots.push_back({range(0, dest), {dest}, 0.0});  // destination MA
  return sched;
}

// Identical slots (same tx and rx sets) are interchangeable, so the solve
// runs on one representative per group and splits the time evenly afterward.
struct MergedLayout {
  std::vector<GeneralSlot> slots;                      // representatives
  std::vector<std::vector<int>> members;               // original indices per representative
  std::vector<std::vector<std::pair<int, int>>> links; // per representative
  std::vector<int> flow_offset;
  int n_flows = 0;
  int t_index(int slot) const { return n_flows + slot; }
  int s_index() const { return n_flows + static_cast<int>(slots.size()); }
  int n_vars() const { return n_flows + static_cast<int>(slots.size()) + 1; }
};

MergedLayout merge_layout(const BoundSchedule& sched) {
  MergedLayout lay;
  for (std::size_t i = 0; i < sched.slots.size(); ++i) {
    const auto& s = sched.slots[i];
    int found = -1;
    for (std::size_t j = 0; j < lay.slots.size(); ++j)
      if (lay.slots[j].tx == s.tx && lay.slots[j].rx == s.rx) {
        found = static_cast<int>(j);
        break;
      }
    if (found < 0) {
      lay.slots.push_back(s);
      lay.members.push_back({static_cast<int>(i)});
    } else {
      lay.members[found].push_back(static_cast<int>(i));
    }
  }
  int off = 0;
  for (const auto& s : lay.slots) {
    std::vector<std::pair<int, int>> lk;
    for (int a : s.tx)
      for (int b : s.rx)
        if (a != b) lk.emplace_back(a, b);
    lay.links.push_back(std::move(lk));
    lay.flow_offset.push_back(off);
    off += static_cast<int>(lay.links.back().size());
  }
  lay.n_flows = off;
  return lay;
}

BarrierProgram build_bound_program(const NetworkInstance& net, const MergedLayout& lay,
                                   double target_rate) {
  const int n = net.n_nodes;
  BarrierProgram prog(lay.n_vars());
  const int s_idx = lay.s_index();
  prog.set_cost(s_idx, 1.0);
  for (int i = 0; i < lay.n_flows; ++i) prog.add_nonneg(i);
  for (std::size_t i = 0; i < lay.slots.size(); ++i) prog.add_nonneg(lay.t_index(static_cast<int>(i)));

  for (int relay = 1; relay <= n - 2; ++relay) {
    std::vector<std::pair<int, double>> terms;
    for (std::size_t s = 0; s < lay.slots.size(); ++s)
      for (std::size_t j = 0; j < lay.links[s].size(); ++j) {
        if (lay.links[s][j].first == relay)
          terms.emplace_back(lay.flow_offset[s] + static_cast<int>(j), 1.0);
        if (lay.links[s][j].second == relay)
          terms.emplace_back(lay.flow_offset[s] + static_cast<int>(j), -1.0);
      }
    prog.add_equality(std::move(terms), 0.0);
  }
  {
    std::vector<std::pair<int, double>> terms;
    for (std::size_t i = 0; i < lay.slots.size(); ++i)
      terms.emplace_back(lay.t_index(static_cast<int>(i)), 1.0);
    prog.add_equality(std::move(terms), 1.0);
  }

  const auto cuts = enumerate_cuts(n);

  // Objective cuts: target_rate - x(C) - s <= 0 for C_S and C_D.
  for (const Cut& cut : {source_cut(n), destination_cut(n)}) {
    std::vector<std::pair<int, double>> terms;
    for (std::size_t s = 0; s < lay.slots.size(); ++s)
      for (std::size_t j = 0; j < lay.links[s].size(); ++j)
        if (cut.contains(lay.links[s][j].first) && !cut.contains(lay.links[s][j].second))
          terms.emplace_back(lay.flow_offset[s] + static_cast<int>(j), -1.0);
    terms.emplace_back(s_idx, -1.0);
    prog.add_linear(std::move(terms), -target_rate);
  }

  // Per slot and per cut, crossing flow is capped by the sum-SNR capacity of
  // the crossing links, scaled by the slot length.
  for (std::size_t s = 0; s < lay.slots.size(); ++s) {
    for (const Cut& cut : cuts) {
      std::vector<std::pair<int, double>> terms;
      double gain_sum = 0.0;
      for (std::size_t j = 0; j < lay.links[s].size(); ++j)
        if (cut.contains(lay.links[s][j].first) && !cut.contains(lay.links[s][j].second)) {
          terms.emplace_back(lay.flow_offset[s] + static_cast<int>(j), 1.0);
          gain_sum += net.gains(lay.links[s][j].first, lay.links[s][j].second);
        }
      if (terms.empty()) continue;
      terms.emplace_back(lay.t_index(static_cast<int>(s)), -std::log1p(net.snr * gain_sum));
      terms.emplace_back(s_idx, -1.0);
      prog.add_linear(std::move(terms), 0.0);
    }
  }
  return prog;
}

std::vector<double> bound_initial_point(const MergedLayout& lay, double target_rate) {
  std::vector<double> v(lay.n_vars(), 0.0);
  const double eps = 1e-3;
  for (int i = 0; i < lay.n_flows; ++i) v[i] = eps;
  for (std::size_t i = 0; i < lay.slots.size(); ++i)
    v[lay.t_index(static_cast<int>(i))] = 1.0 / static_cast<double>(lay.slots.size());
  v[lay.s_index()] = std::max(target_rate, lay.n_flows * eps) + 1.0;
  return v;
}

struct BoundFeasibility {
  bool feasible = false;
  std::vector<double> v;
  int newton_steps = 0;
};

BoundFeasibility bound_phase1(const NetworkInstance& net, const MergedLayout& lay,
                              double target_rate) {
  BarrierProgram prog = build_bound_program(net, lay, target_rate);
  BarrierProgram::Options opts;
  opts.early_exit = true;
  opts.feasible_below = -1e-6;
  opts.infeasible_above = kInnerFeasTol;
  opts.mu_final = std::min(1e-9, 0.25 * kInnerFeasTol / prog.inequality_count());
  BarrierProgram::Outcome out;
  try {
    out = prog.minimize(bound_initial_point(lay, target_rate), opts);
  } catch (const std::logic_error& e) {
    throw SolverError(std::string("bound solve failed: ") + e.what(), 0,
                      std::numeric_limits<double>::quiet_NaN());
  }
  if (out.status == BarrierProgram::Status::Stalled && out.objective > kInnerFeasTol)
    throw SolverError("bound solve stalled", out.newton_steps, out.objective, out.v);
  BoundFeasibility res;
  res.feasible = out.objective <= kInnerFeasTol;
  res.v = std::move(out.v);
  res.newton_steps = out.newton_steps;
  return res;
}

void check_bound_network(const NetworkInstance& net) {
  net.validate();
  if (net.n_nodes > 5)
    throw ConfigError("cut-set bound layouts are defined for 3, 4 or 5 nodes");
}

double bound_direct_rate(const NetworkInstance& net) {
  return capacity(net.gains(0, net.n_nodes - 1) * net.snr);
}

}  // namespace

BoundSchedule bound_schedule(int n_nodes) {
  if (n_nodes != 4 && n_nodes != 5)
    throw ConfigError("bound_schedule is defined for 4 or 5 nodes");
  return bound_schedule_impl(n_nodes);
}

BoundResult cutset_upper_rate(const NetworkInstance& net) {
  check_bound_network(net);
  if (net.n_nodes == 3) {
    FoProblem p{net, false, std::nullopt};
    RateResult fo = solve_fo(p);
    BoundResult res;
    res.rate = fo.rate;
    res.fo_fallback = true;
    res.diag = fo.diag;
    return res;
  }

  const BoundSchedule sched = bound_schedule(net.n_nodes);
  const MergedLayout lay = merge_layout(sched);

  double out_sum = 0.0, in_sum = 0.0;
  for (int j = 1; j < net.n_nodes; ++j) out_sum += net.gains(0, j);
  for (int i = 0; i + 1 < net.n_nodes; ++i) in_sum += net.gains(i, net.n_nodes - 1);
  double hi = capacity(net.snr * out_sum) + capacity(net.snr * in_sum) + 1e-6;
  double lo = bound_direct_rate(net);

  BoundResult res;
  res.schedule = sched;
  std::vector<double> best_v;
  while (hi - lo > kBoundRateTol) {
    const double mid = 0.5 * (lo + hi);
    auto r = bound_phase1(net, lay, mid);
    res.diag.newton_steps += r.newton_steps;
    ++res.diag.iterations;
    if (r.feasible) {
      lo = mid;
      best_v = std::move(r.v);
    } else {
      hi = mid;
    }
    if (res.diag.iterations > 200)
      throw SolverError("bound bisection failed to close its bracket", res.diag.newton_steps,
                        hi - lo);
  }
  res.rate = lo;
  if (!best_v.empty()) {
    // Report the schedule with the merged time split evenly across identical
    // slots; the split is immaterial to the optimum.
    for (std::size_t s = 0; s < lay.slots.size(); ++s) {
      const double share =
          best_v[lay.t_index(static_cast<int>(s))] / static_cast<double>(lay.members[s].size());
      for (int m : lay.members[s]) res.schedule.slots[m].length = share;
    }
    res.diag.kkt_residual = 0.0;
  } else {
    res.schedule.slots.front().length = 1.0;  // direct-only witness
  }
  return res;
}

bool bound_achieves(const NetworkInstance& net, double target_rate) {
  check_bound_network(net);
  if (target_rate <= 0.0) return true;
  if (net.n_nodes == 3) return fo_achieves(FoProblem{net, false, std::nullopt}, target_rate);
  if (bound_direct_rate(net) >= target_rate) return true;
  if (fo_rate_upper_screen(net) < target_rate) return false;
  const MergedLayout lay = merge_layout(bound_schedule(net.n_nodes));
  return bound_phase1(net, lay, target_rate).feasible;
}

double regularized_lower_gamma(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("regularized_lower_gamma: a must be positive");
  if (x < 0.0) throw std::domain_error("regularized_lower_gamma: x must be nonnegative");
  if (x == 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // Series: gamma(a,x) = x^a e^-x sum x^n / (a (a+1) ... (a+n)).
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Continued fraction for Q(a,x) by modified Lentz.
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

double dmt_reference(int n_nodes, double r) {
  if (n_nodes < 3) throw ConfigError("dmt_reference: need at least 3 nodes");
  if (!(r > 0.0 && r < 1.0)) throw std::domain_error("dmt_reference: r must lie in (0, 1)");
  return (n_nodes - 1) * (1.0 - r);
}

OutageLowerBound ma_cut_outage_lower_fixed(int n_nodes, double rate_nats, double snr) {
  if (n_nodes < 3) throw ConfigError("ma_cut_outage_lower: need at least 3 nodes");
  if (!(snr > 0.0)) throw ConfigError("ma_cut_outage_lower: snr must be positive");
  const double x = std::expm1(rate_nats) / snr;
  return {regularized_lower_gamma(n_nodes - 1, x), true};
}

OutageLowerBound ma_cut_outage_lower_mux(int n_nodes, double mux_r, double snr) {
  if (n_nodes < 3) throw ConfigError("ma_cut_outage_lower: need at least 3 nodes");
  if (!(snr > 0.0)) throw ConfigError("ma_cut_outage_lower: snr must be positive");
  const double x = (std::pow(snr, mux_r) - 1.0) / snr;
  return {regularized_lower_gamma(n_nodes - 1, std::max(0.0, x)), true};
}

OutageLowerBound ma_cut_outage_lower_fixed(const std::vector<double>& dest_means,
                                           double rate_nats, double snr, long mc_trials,
                                           std::uint64_t seed) {
  if (dest_means.size() < 2) throw ConfigError("ma_cut_outage_lower: need at least 2 links");
  const double first = dest_means.front();
  bool uniform = true;
  for (double m : dest_means)
    if (std::abs(m - first) > 1e-12 * std::max(1.0, first)) uniform = false;
  const double x = std::expm1(rate_nats) / snr;
  if (uniform)
    return {regularized_lower_gamma(static_cast<double>(dest_means.size()), x / first), true};
  long hits = 0;
  for (long t = 0; t < mc_trials; ++t) {
    SubstreamRng rng(seed, static_cast<std::uint64_t>(t));
    double sum = 0.0;
    for (double m : dest_means) sum += rng.next_exponential(m);
    if (sum < x) ++hits;
  }
  return {static_cast<double>(hits) / static_cast<double>(mc_trials), false};
}

}  // namespace relay
