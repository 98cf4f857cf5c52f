#pragma once

#include <cstdint>
#include <vector>

#include "relay/fo_solver.hpp"
#include "relay/netmodel.hpp"

namespace relay {

// A generalized slot for the max-flow-min-cut bound: several transmitters
// and receivers may be simultaneously active; interference is ignored, which
// only loosens an upper bound.
struct GeneralSlot {
  std::vector<int> tx;
  std::vector<int> rx;
  double length = 0.0;
};

struct BoundSchedule {
  std::vector<GeneralSlot> slots;
};

// N=4: source BC, the two source+relay pairings, destination MA.
// N=5: source BC, six intermediate all-transmit/all-listen slots, destination MA.
BoundSchedule bound_schedule(int n_nodes);

struct BoundResult {
  double rate = 0.0;  // nats
  BoundSchedule schedule;
  bool fo_fallback = false;  // N=3: the FO rate is already cut-set tight
  SolverDiagnostics diag;
};

// Upper bound on any scheme's rate for this realization: maximize
// min{x(C_S), x(C_D)} where each slot's flow across each cut is capped by
// the sum-SNR capacity of the crossing links.
BoundResult cutset_upper_rate(const NetworkInstance& net);
bool bound_achieves(const NetworkInstance& net, double target_rate);

// Regularized lower incomplete gamma P(a, x) = gamma(a,x)/Gamma(a); series
// for x < a+1, continued fraction otherwise.
double regularized_lower_gamma(double a, double x);

// Reference diversity-multiplexing curve (N-1)(1-r) for 0 < r < 1.
double dmt_reference(int n_nodes, double r);

struct OutageLowerBound {
  double value = 0.0;
  bool exact = true;  // false when the hypoexponential Monte Carlo fallback ran
};

// Outage lower bound from the destination MA cut with i.i.d. unit-mean
// gains: P(N-1, (e^R - 1)/S). Rates in nats.
OutageLowerBound ma_cut_outage_lower_fixed(int n_nodes, double rate_nats, double snr);
// Multiplexing-gain form with threshold (S^r - 1)/S.
OutageLowerBound ma_cut_outage_lower_mux(int n_nodes, double mux_r, double snr);
// Non-uniform destination-link means: Monte Carlo over the sum of
// independent exponentials, flagged as inexact (uniform means short-circuit
// to the closed form).
OutageLowerBound ma_cut_outage_lower_fixed(const std::vector<double>& dest_means,
                                           double rate_nats, double snr,
                                           long mc_trials = 200000,
                                           std::uint64_t seed = 0x6d6163756cULL);

}  // namespace relay
