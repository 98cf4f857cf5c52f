#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "relay/flowgraph.hpp"
#include "relay/netmodel.hpp"

namespace relay {

// Raised when the inner interior-point scheme cannot certify a verdict;
// distinct from an infeasible outcome. Carries the last iterate (flows,
// slot lengths, slack) when one exists.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int newton_steps_, double best_slack_,
              std::vector<double> last_iterate_ = {})
      : std::runtime_error(what),
        newton_steps(newton_steps_),
        best_slack(best_slack_),
        last_iterate(std::move(last_iterate_)) {}
  int newton_steps = 0;
  double best_slack = 0.0;
  std::vector<double> last_iterate;
};

inline constexpr double kOuterRateTol = 1e-5;   // bisection tolerance on the rate, nats
inline constexpr double kInnerFeasTol = 1e-7;   // constraint-satisfaction slack of witnesses
inline constexpr int kMaxFoNodes = 8;
inline constexpr int kMaxFullCutNodes = 6;

struct FoProblem {
  NetworkInstance network;
  bool full_cuts = false;                     // all 2^(N-2) cuts instead of {C_S, C_D}
  std::optional<SlotSchedule> slot_template;  // defaults to canonical_schedule(N)
};

struct SolverDiagnostics {
  int iterations = 0;           // outer bisection steps
  int newton_steps = 0;         // total inner Newton steps
  double kkt_residual = 0.0;    // worst constraint violation of the returned allocation
  double max_inter_relay = 0.0; // largest single inter-relay flow in the optimum
};

struct RateResult {
  double rate = 0.0;  // nats; equals reduced_min_cut(flows)
  SlotSchedule schedule;
  FlowAllocation flows;
  SolverDiagnostics diag;
};

struct FeasibilityCheck {
  bool feasible = false;
  RateResult witness;  // meaningful only when feasible
};

// Can the network sustain end-to-end rate R (nats)? Returns a witness
// allocation when it can.
FeasibilityCheck fo_feasible(const FoProblem& problem, double target_rate);

// Flow-optimized protocol: bisection on fo_feasible to kOuterRateTol.
RateResult solve_fo(const FoProblem& problem);

// Validation mode with the full cut enumeration in the objective (N <= 6).
RateResult solve_fo_fullcuts(const FoProblem& problem);

// Fast outage-style query: cheap screens, then one feasibility solve with
// early exits. No witness is produced.
bool fo_achieves(const FoProblem& problem, double target_rate);

// min of the two single-cut sum capacities; no rate above this is feasible
// for the FO protocol or for the cut-set bound schedule.
double fo_rate_upper_screen(const NetworkInstance& net);

struct ValidationReport {
  bool ok = true;
  std::string detail;
};

// Independent re-check of a solver result against the flowgraph and
// capacity-region contracts; does not reuse any solver bookkeeping.
ValidationReport validate_rate_result(const NetworkInstance& net, const RateResult& result,
                                      double tol = 1e-6);

// Debug dump of the phase-I program at the given target rate: constraint
// values and barrier multiplier estimates at the final iterate, as JSON.
std::string fo_debug_json(const FoProblem& problem, double target_rate);

}  // namespace relay
