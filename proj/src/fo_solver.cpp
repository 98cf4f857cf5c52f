#include "relay/fo_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relay/barrier.hpp"
#include "relay/capregion.hpp"

namespace relay {

namespace {

constexpr double kSlotZeroTol = 1e-9;
constexpr double kInitFlow = 1e-3;

struct Layout {
  SlotSchedule sched;
  std::vector<int> flow_offset;  // variable index of each slot's first flow
  int n_flows = 0;
  int n_slots = 0;
  int t_index(int slot) const { return n_flows + slot; }
  int s_index() const { return n_flows + n_slots; }
  int n_vars() const { return n_flows + n_slots + 1; }
};

Layout make_layout(const SlotSchedule& tmpl) {
  Layout lay;
  lay.sched = tmpl;
  lay.n_slots = static_cast<int>(tmpl.slots.size());
  int off = 0;
  for (const auto& slot : tmpl.slots) {
    lay.flow_offset.push_back(off);
    off += static_cast<int>(slot.peers.size());
  }
  lay.n_flows = off;
  return lay;
}

// Builds the phase-I feasibility program: minimize the shared slack s over
// flows and slot lengths subject to conservation and total-time equalities,
// with the cut, MA and BC constraints relaxed by s.
BarrierProgram build_program(const NetworkInstance& net, const Layout& lay,
                             const std::vector<Cut>& cuts, double target_rate) {
  const double snr = net.snr;
  BarrierProgram prog(lay.n_vars());
  const int s_idx = lay.s_index();
  prog.set_cost(s_idx, 1.0);

  for (int i = 0; i < lay.n_flows; ++i) prog.add_nonneg(i);
  for (int i = 0; i < lay.n_slots; ++i) prog.add_nonneg(lay.t_index(i));

  // Conservation per relay and the total-time constraint.
  for (int relay = 1; relay <= net.n_nodes - 2; ++relay) {
    std::vector<std::pair<int, double>> terms;
    for (int s = 0; s < lay.n_slots; ++s) {
      const auto links = slot_links(lay.sched.slots[s]);
      for (std::size_t j = 0; j < links.size(); ++j) {
        if (links[j].first == relay) terms.emplace_back(lay.flow_offset[s] + static_cast<int>(j), 1.0);
        if (links[j].second == relay) terms.emplace_back(lay.flow_offset[s] + static_cast<int>(j), -1.0);
      }
    }
    prog.add_equality(std::move(terms), 0.0);
  }
  {
    std::vector<std::pair<int, double>> terms;
    for (int i = 0; i < lay.n_slots; ++i) terms.emplace_back(lay.t_index(i), 1.0);
    prog.add_equality(std::move(terms), 1.0);
  }

  // target_rate - x(C) - s <= 0 for every cut in the objective set.
  for (const Cut& cut : cuts) {
    std::vector<std::pair<int, double>> terms;
    for (int s = 0; s < lay.n_slots; ++s) {
      const auto links = slot_links(lay.sched.slots[s]);
      for (std::size_t j = 0; j < links.size(); ++j)
        if (cut.contains(links[j].first) && !cut.contains(links[j].second))
          terms.emplace_back(lay.flow_offset[s] + static_cast<int>(j), -1.0);
    }
    terms.emplace_back(s_idx, -1.0);
    prog.add_linear(std::move(terms), -target_rate);
  }

  // Capacity constraints per slot.
  for (int s = 0; s < lay.n_slots; ++s) {
    const auto& slot = lay.sched.slots[s];
    const int t_idx = lay.t_index(s);
    const int np = static_cast<int>(slot.peers.size());
    if (slot.kind == SlotKind::MultipleAccess) {
      for (unsigned subset = 1; subset < (1u << np); ++subset) {
        std::vector<std::pair<int, double>> terms;
        double gain_sum = 0.0;
        for (int j = 0; j < np; ++j)
          if ((subset >> j) & 1u) {
            terms.emplace_back(lay.flow_offset[s] + j, 1.0);
            gain_sum += net.gains(slot.peers[j], slot.hub);
          }
        terms.emplace_back(t_idx, -std::log1p(snr * gain_sum));
        terms.emplace_back(s_idx, -1.0);
        prog.add_linear(std::move(terms), 0.0);
      }
    } else {
      std::vector<std::pair<double, int>> live;  // (gain, flow var)
      for (int j = 0; j < np; ++j) {
        const double z = net.gains(slot.hub, slot.peers[j]);
        const int var = lay.flow_offset[s] + j;
        if (z < kDeadGain) {
          // Dead receiver: its flow is capped at the slack level.
          prog.add_linear({{var, 1.0}, {s_idx, -1.0}}, 0.0);
        } else {
          live.emplace_back(z, var);
        }
      }
      if (!live.empty()) {
        std::stable_sort(live.begin(), live.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        std::vector<int> flow_idx;
        std::vector<double> gains;
        for (const auto& [z, var] : live) {
          gains.push_back(z);
          flow_idx.push_back(var);
        }
        prog.add_bc_block(std::move(flow_idx), std::move(gains), t_idx, s_idx, snr);
      }
    }
  }
  return prog;
}

// The canonical template gives every relay equal in- and out-degree, so a
// uniform flow vector satisfies conservation exactly.
std::vector<double> initial_point(const BarrierProgram& prog, const Layout& lay,
                                  const NetworkInstance& net, const std::vector<Cut>& cuts,
                                  double target_rate) {
  std::vector<double> v(lay.n_vars(), 0.0);
  for (int i = 0; i < lay.n_flows; ++i) v[i] = kInitFlow;
  for (int i = 0; i < lay.n_slots; ++i) v[lay.t_index(i)] = 1.0 / lay.n_slots;

  // Slack above the worst violated relaxed constraint.
  double worst = 0.0;
  worst = std::max(worst, target_rate);  // cut rows are at most target_rate when flows are tiny
  for (int s = 0; s < lay.n_slots; ++s) {
    const auto& slot = lay.sched.slots[s];
    const double t = v[lay.t_index(s)];
    const int np = static_cast<int>(slot.peers.size());
    if (slot.kind == SlotKind::MultipleAccess) {
      worst = std::max(worst, np * kInitFlow);
    } else {
      BcDemand d{slot.hub, {}, t};
      for (int j = 0; j < np; ++j)
        if (net.gains(slot.hub, slot.peers[j]) >= kDeadGain)
          d.targets.emplace_back(slot.peers[j], kInitFlow);
      const double need = bc_min_snr(d, net.gains);
      if (std::isfinite(need)) worst = std::max(worst, t * (need - net.snr));
      worst = std::max(worst, kInitFlow);  // dead-receiver rows
    }
  }
  v[lay.s_index()] = worst + 1.0;
  (void)cuts;
  (void)prog;
  return v;
}

std::vector<Cut> objective_cuts(const FoProblem& problem) {
  const int n = problem.network.n_nodes;
  if (problem.full_cuts) return enumerate_cuts(n);
  return {source_cut(n), destination_cut(n)};
}

BarrierProgram::Options phase1_options(const BarrierProgram& prog, bool early_exit) {
  BarrierProgram::Options opts;
  opts.early_exit = early_exit;
  opts.feasible_below = -1e-6;
  opts.infeasible_above = kInnerFeasTol;
  // Keep the duality gap m*mu comfortably inside the feasibility threshold.
  opts.mu_final = std::min(1e-9, 0.25 * kInnerFeasTol / prog.inequality_count());
  return opts;
}

struct Phase1Result {
  bool feasible = false;
  std::vector<double> v;
  double slack = 0.0;
  int newton_steps = 0;
};

Phase1Result run_phase1(const NetworkInstance& net, const Layout& lay,
                        const std::vector<Cut>& cuts, double target_rate, bool early_exit) {
  BarrierProgram prog = build_program(net, lay, cuts, target_rate);
  const auto opts = phase1_options(prog, early_exit);
  auto start = initial_point(prog, lay, net, cuts, target_rate);
  BarrierProgram::Outcome out;
  try {
    out = prog.minimize(std::move(start), opts);
  } catch (const std::logic_error& e) {
    throw SolverError(std::string("phase-1 solve failed: ") + e.what(), 0,
                      std::numeric_limits<double>::quiet_NaN());
  }
  // A stall below the threshold still certifies feasibility (the iterate is
  // an interior point with every violation at most the slack); above it no
  // verdict can be trusted.
  if (out.status == BarrierProgram::Status::Stalled && out.objective > kInnerFeasTol)
    throw SolverError("phase-1 stalled without a verdict", out.newton_steps, out.objective,
                      out.v);
  Phase1Result res;
  res.v = std::move(out.v);
  res.slack = out.objective;
  res.newton_steps = out.newton_steps;
  res.feasible = res.slack <= kInnerFeasTol;
  return res;
}

// Converts a solver point into a schedule + allocation, zeroing slots whose
// length fell below kSlotZeroTol and rescaling the survivors to total time 1.
RateResult extract_result(const Layout& lay, const std::vector<double>& v) {
  RateResult res;
  SlotSchedule sched = lay.sched;
  double kept = 0.0;
  std::vector<bool> zeroed(lay.n_slots, false);
  for (int s = 0; s < lay.n_slots; ++s) {
    double t = v[lay.t_index(s)];
    if (t < kSlotZeroTol) {
      t = 0.0;
      zeroed[s] = true;
    }
    sched.slots[s].length = t;
    kept += t;
  }
  for (auto& slot : sched.slots) slot.length /= kept;

  FlowAllocation alloc(sched);
  for (int s = 0; s < lay.n_slots; ++s) {
    const int np = static_cast<int>(sched.slots[s].peers.size());
    for (int j = 0; j < np; ++j)
      alloc.set_flow(s, j, zeroed[s] ? 0.0 : std::max(0.0, v[lay.flow_offset[s] + j]));
  }

  // Undo the cleanup when it perturbed conservation noticeably.
  bool ok = true;
  for (double r : conservation_residuals(alloc))
    if (std::abs(r) > 0.5 * kConservationTol) ok = false;
  if (!ok) {
    for (int s = 0; s < lay.n_slots; ++s) {
      sched.slots[s].length = v[lay.t_index(s)];
    }
    alloc = FlowAllocation(sched);
    for (int s = 0; s < lay.n_slots; ++s) {
      const int np = static_cast<int>(sched.slots[s].peers.size());
      for (int j = 0; j < np; ++j) alloc.set_flow(s, j, std::max(0.0, v[lay.flow_offset[s] + j]));
    }
  }

  res.schedule = alloc.schedule();
  res.rate = reduced_min_cut(alloc);
  for (int s = 0; s < alloc.slot_count(); ++s) {
    const auto& lk = alloc.links(s);
    for (std::size_t j = 0; j < lk.size(); ++j)
      if (lk[j].first != 0 && lk[j].second != alloc.n_nodes() - 1)
        res.diag.max_inter_relay = std::max(res.diag.max_inter_relay, alloc.flow(s, static_cast<int>(j)));
  }
  res.flows = std::move(alloc);
  return res;
}

// Direct transmission over the source broadcast slot: always feasible, used
// to seed the bisection with an analytic witness.
RateResult direct_result(const NetworkInstance& net, const Layout& lay) {
  SlotSchedule sched = lay.sched;
  int src_bc = -1;
  for (int s = 0; s < lay.n_slots; ++s) {
    sched.slots[s].length = 0.0;
    if (sched.slots[s].kind == SlotKind::Broadcast && sched.slots[s].hub == 0) src_bc = s;
  }
  if (src_bc < 0) throw ConfigError("slot template lacks a source broadcast slot");
  sched.slots[src_bc].length = 1.0;
  FlowAllocation alloc(sched);
  const double rate = capacity(net.gains(0, net.n_nodes - 1) * net.snr);
  alloc.set_flow(src_bc, 0, net.n_nodes - 1, rate);
  RateResult res;
  res.rate = rate;
  res.schedule = alloc.schedule();
  res.flows = std::move(alloc);
  return res;
}

void check_problem(const FoProblem& problem) {
  problem.network.validate();
  if (problem.network.n_nodes > kMaxFoNodes)
    throw ConfigError("fo solver is sized for at most 8 nodes");
  if (problem.full_cuts && problem.network.n_nodes > kMaxFullCutNodes)
    throw ConfigError("full cut enumeration is limited to 6 nodes");
}

Layout problem_layout(const FoProblem& problem) {
  return make_layout(problem.slot_template ? *problem.slot_template
                                           : canonical_schedule(problem.network.n_nodes));
}

}  // namespace

double fo_rate_upper_screen(const NetworkInstance& net) {
  double out_sum = 0.0, in_sum = 0.0;
  for (int j = 1; j < net.n_nodes; ++j) out_sum += net.gains(0, j);
  for (int i = 0; i + 1 < net.n_nodes; ++i) in_sum += net.gains(i, net.n_nodes - 1);
  return std::min(capacity(net.snr * out_sum), capacity(net.snr * in_sum));
}

FeasibilityCheck fo_feasible(const FoProblem& problem, double target_rate) {
  check_problem(problem);
  if (target_rate < 0.0) throw std::domain_error("fo_feasible: negative target rate");
  const Layout lay = problem_layout(problem);
  FeasibilityCheck check;
  if (target_rate == 0.0) {
    check.feasible = true;
    check.witness = direct_result(problem.network, lay);
    return check;
  }
  auto r = run_phase1(problem.network, lay, objective_cuts(problem), target_rate, true);
  check.feasible = r.feasible;
  if (r.feasible) {
    check.witness = extract_result(lay, r.v);
    check.witness.diag.newton_steps = r.newton_steps;
    check.witness.diag.kkt_residual = std::max(0.0, r.slack);
  }
  return check;
}

namespace {

RateResult solve_bisection(const FoProblem& problem) {
  check_problem(problem);
  const NetworkInstance& net = problem.network;
  const Layout lay = problem_layout(problem);
  const std::vector<Cut> cuts = objective_cuts(problem);

  double out_sum = 0.0, in_sum = 0.0;
  for (int j = 1; j < net.n_nodes; ++j) out_sum += net.gains(0, j);
  for (int i = 0; i + 1 < net.n_nodes; ++i) in_sum += net.gains(i, net.n_nodes - 1);
  double hi = capacity(net.snr * out_sum) + capacity(net.snr * in_sum) + 1e-6;

  RateResult best = direct_result(net, lay);
  double lo = best.rate;
  int iterations = 0, newton_total = 0;

  while (hi - lo > kOuterRateTol) {
    const double mid = 0.5 * (lo + hi);
    auto r = run_phase1(net, lay, cuts, mid, true);
    newton_total += r.newton_steps;
    ++iterations;
    if (r.feasible) {
      RateResult w = extract_result(lay, r.v);
      if (w.rate > best.rate) best = std::move(w);
      lo = std::max(mid, best.rate);
    } else {
      hi = mid;
    }
    if (iterations > 200)
      throw SolverError("rate bisection failed to close its bracket", newton_total, hi - lo);
  }

  best.diag.iterations = iterations;
  best.diag.newton_steps = newton_total;
  const auto report = validate_rate_result(net, best);
  if (!report.ok)
    throw SolverError("solver witness failed validation: " + report.detail, newton_total, 0.0);
  return best;
}

}  // namespace

RateResult solve_fo(const FoProblem& problem) { return solve_bisection(problem); }

RateResult solve_fo_fullcuts(const FoProblem& problem) {
  FoProblem full = problem;
  full.full_cuts = true;
  return solve_bisection(full);
}

bool fo_achieves(const FoProblem& problem, double target_rate) {
  check_problem(problem);
  const NetworkInstance& net = problem.network;
  if (target_rate <= 0.0) return true;
  if (capacity(net.gains(0, net.n_nodes - 1) * net.snr) >= target_rate) return true;
  if (fo_rate_upper_screen(net) < target_rate) return false;
  const Layout lay = problem_layout(problem);
  return run_phase1(net, lay, objective_cuts(problem), target_rate, true).feasible;
}

std::string fo_debug_json(const FoProblem& problem, double target_rate) {
  check_problem(problem);
  const Layout lay = problem_layout(problem);
  const std::vector<Cut> cuts = objective_cuts(problem);
  BarrierProgram prog = build_program(problem.network, lay, cuts, target_rate);
  auto opts = phase1_options(prog, false);
  const auto out = prog.minimize(initial_point(prog, lay, problem.network, cuts, target_rate), opts);
  return prog.debug_json(out.v, opts.mu_final);
}

ValidationReport validate_rate_result(const NetworkInstance& net, const RateResult& result,
                                      double tol) {
  ValidationReport rep;
  auto fail = [&rep](const std::string& msg) {
    rep.ok = false;
    if (!rep.detail.empty()) rep.detail += "; ";
    rep.detail += msg;
  };

  const FlowAllocation& alloc = result.flows;
  const SlotSchedule& sched = alloc.schedule();
  if (std::abs(sched.total_length() - 1.0) > tol) fail("slot lengths do not sum to 1");
  for (const auto& slot : sched.slots)
    if (slot.length < 0.0) fail("negative slot length");

  const auto residuals = conservation_residuals(alloc);
  for (double r : residuals)
    if (std::abs(r) > kConservationTol) fail("flow conservation violated");

  const double cap_slack = tol * (1.0 + net.snr);
  for (int s = 0; s < alloc.slot_count(); ++s) {
    const auto& slot = sched.slots[s];
    const int np = static_cast<int>(slot.peers.size());
    if (slot.kind == SlotKind::Broadcast) {
      BcDemand d{slot.hub, {}, slot.length};
      for (int j = 0; j < np; ++j) {
        const double flow = alloc.flow(s, j);
        if (net.gains(slot.hub, slot.peers[j]) < kDeadGain || slot.length <= 0.0) {
          if (flow > tol) fail("flow on a zero-capacity broadcast link");
        } else {
          d.targets.emplace_back(slot.peers[j], flow);
        }
      }
      if (!d.targets.empty() && slot.length > 0.0) {
        const double need = bc_min_snr(d, net.gains);
        if (!(slot.length * (need - net.snr) <= cap_slack)) fail("broadcast slot over SNR budget");
      }
    } else {
      for (unsigned subset = 1; subset < (1u << np); ++subset) {
        double flow_sum = 0.0, gain_sum = 0.0;
        for (int j = 0; j < np; ++j)
          if ((subset >> j) & 1u) {
            flow_sum += alloc.flow(s, j);
            gain_sum += net.gains(slot.peers[j], slot.hub);
          }
        if (flow_sum > slot.length * std::log1p(net.snr * gain_sum) + tol)
          fail("MA slot outside its polymatroid");
      }
    }
  }

  double mincut;
  try {
    mincut = reduced_min_cut(alloc);
  } catch (const ContractViolation&) {
    fail("reduced min cut unavailable (conservation)");
    return rep;
  }
  if (std::abs(result.rate - mincut) > tol) fail("reported rate differs from the reduced min cut");
  return rep;
}

}  // namespace relay
