#pragma once

#include <string>
#include <utility>
#include <vector>

#include "relay/linalg.hpp"

namespace relay {

// Smooth convex program
//     minimize cost.v   subject to   f_j(v) <= 0,  A v = b,
// solved by a logarithmic-barrier interior scheme with equality-constrained
// Newton steps. Inequalities come in three shapes: variable nonnegativity,
// sparse linear rows, and broadcast-capacity blocks in the jointly convex
// perspective form t*F(x/t) - snr*t - s <= 0.
class BarrierProgram {
 public:
  explicit BarrierProgram(int n_vars);

  int n_vars() const { return n_; }
  void set_cost(int idx, double c) { cost_[idx] = c; }

  void add_equality(std::vector<std::pair<int, double>> terms, double rhs);
  void add_nonneg(int idx);
  // terms.v <= rhs
  void add_linear(std::vector<std::pair<int, double>> terms, double rhs);
  // Flows and gains ordered by decreasing gain; slack_idx < 0 drops the slack term.
  void add_bc_block(std::vector<int> flow_idx, std::vector<double> gains_desc, int t_idx,
                    int slack_idx, double snr);

  int inequality_count() const;

  struct Options {
    double mu_initial = 10.0;
    double mu_shrink = 0.1;
    double mu_final = 1e-9;
    double newton_tol = 1e-10;      // on (Newton decrement)^2 / 2
    int max_newton_per_stage = 60;
    bool early_exit = false;
    double feasible_below = -1e-6;  // stop once objective < this (certified point in hand)
    double infeasible_above = 1e-7; // stop once objective - m*mu > this at a finished stage
  };

  enum class Status { Converged, EarlyFeasible, EarlyInfeasible, Stalled };

  struct Outcome {
    Status status = Status::Converged;
    std::vector<double> v;
    double objective = 0.0;
    int newton_steps = 0;
  };

  // v0 must satisfy the equalities exactly and be strictly interior.
  Outcome minimize(std::vector<double> v0, const Options& opts) const;

  // Constraint values and barrier multiplier estimates at v, for debugging.
  std::string debug_json(const std::vector<double>& v, double mu) const;

 private:
  struct LinearRow {
    std::vector<int> idx;
    std::vector<double> coef;
    double rhs;
  };
  struct BcBlock {
    std::vector<int> flow_idx;
    std::vector<double> weights;  // w_1 = 1/Z_1, w_k = 1/Z_k - 1/Z_{k-1} >= 0
    double w_base = 0.0;          // 1/Z_K
    int t_idx = -1;
    int s_idx = -1;
    double snr = 0.0;
  };

  double bc_value(const BcBlock& b, const std::vector<double>& v) const;
  bool interior(const std::vector<double>& v) const;
  // Barrier potential cost.v + mu * phi(v); +inf outside the interior.
  double potential(const std::vector<double>& v, double mu) const;

  int n_ = 0;
  std::vector<double> cost_;
  std::vector<LinearRow> eq_;
  std::vector<double> eq_rhs_;
  std::vector<int> nonneg_;
  std::vector<LinearRow> linear_;
  std::vector<BcBlock> bc_;
};

}  // namespace relay
