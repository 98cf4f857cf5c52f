#include "relay/barrier.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace relay {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kExpArgCap = 500.0;  // beyond this the perspective term is effectively +inf
}  // namespace

BarrierProgram::BarrierProgram(int n_vars) : n_(n_vars), cost_(n_vars, 0.0) {}

void BarrierProgram::add_equality(std::vector<std::pair<int, double>> terms, double rhs) {
  LinearRow row;
  for (auto& [i, c] : terms) {
    row.idx.push_back(i);
    row.coef.push_back(c);
  }
  row.rhs = rhs;
  eq_.push_back(std::move(row));
  eq_rhs_.push_back(rhs);
}

void BarrierProgram::add_nonneg(int idx) { nonneg_.push_back(idx); }

void BarrierProgram::add_linear(std::vector<std::pair<int, double>> terms, double rhs) {
  LinearRow row;
  for (auto& [i, c] : terms) {
    row.idx.push_back(i);
    row.coef.push_back(c);
  }
  row.rhs = rhs;
  linear_.push_back(std::move(row));
}

void BarrierProgram::add_bc_block(std::vector<int> flow_idx, std::vector<double> gains_desc,
                                  int t_idx, int slack_idx, double snr) {
  BcBlock b;
  b.flow_idx = std::move(flow_idx);
  const std::size_t k = gains_desc.size();
  if (b.flow_idx.size() != k || k == 0)
    throw std::logic_error("add_bc_block: flows and gains must match and be nonempty");
  b.weights.resize(k);
  b.weights[0] = 1.0 / gains_desc[0];
  for (std::size_t i = 1; i < k; ++i) {
    b.weights[i] = 1.0 / gains_desc[i] - 1.0 / gains_desc[i - 1];
    if (b.weights[i] < 0.0) throw std::logic_error("add_bc_block: gains must be sorted descending");
  }
  b.w_base = 1.0 / gains_desc[k - 1];
  b.t_idx = t_idx;
  b.s_idx = slack_idx;
  b.snr = snr;
  bc_.push_back(std::move(b));
}

int BarrierProgram::inequality_count() const {
  return static_cast<int>(nonneg_.size() + linear_.size() + bc_.size());
}

double BarrierProgram::bc_value(const BcBlock& b, const std::vector<double>& v) const {
  const double t = v[b.t_idx];
  if (!(t > 0.0)) return kInf;
  const std::size_t k = b.flow_idx.size();
  // F(R) = sum_k w_k exp(T_k) - w_base with T_k the suffix sums of rates.
  double f_sum = -b.w_base;
  double suffix = 0.0;
  for (std::size_t j = k; j-- > 0;) {
    suffix += v[b.flow_idx[j]] / t;
    if (suffix > kExpArgCap) return kInf;
  }
  double tail = 0.0;
  for (std::size_t j = k; j-- > 0;) {
    tail += v[b.flow_idx[j]] / t;
    f_sum += b.weights[j] * std::exp(tail);
  }
  double val = t * (f_sum - b.snr);
  if (b.s_idx >= 0) val -= v[b.s_idx];
  return val;
}

bool BarrierProgram::interior(const std::vector<double>& v) const {
  for (int i : nonneg_)
    if (!(v[i] > 0.0)) return false;
  for (const auto& row : linear_) {
    double a = -row.rhs;
    for (std::size_t j = 0; j < row.idx.size(); ++j) a += row.coef[j] * v[row.idx[j]];
    if (!(a < 0.0)) return false;
  }
  for (const auto& b : bc_)
    if (!(bc_value(b, v) < 0.0)) return false;
  return true;
}

double BarrierProgram::potential(const std::vector<double>& v, double mu) const {
  double obj = 0.0;
  for (int i = 0; i < n_; ++i) obj += cost_[i] * v[i];
  double phi = 0.0;
  for (int i : nonneg_) {
    if (!(v[i] > 0.0)) return kInf;
    phi -= std::log(v[i]);
  }
  for (const auto& row : linear_) {
    double a = -row.rhs;
    for (std::size_t j = 0; j < row.idx.size(); ++j) a += row.coef[j] * v[row.idx[j]];
    if (!(a < 0.0)) return kInf;
    phi -= std::log(-a);
  }
  for (const auto& b : bc_) {
    const double a = bc_value(b, v);
    if (!(a < 0.0)) return kInf;
    phi -= std::log(-a);
  }
  return obj + mu * phi;
}

BarrierProgram::Outcome BarrierProgram::minimize(std::vector<double> v0, const Options& opts) const {
  const int n = n_;
  const int p = static_cast<int>(eq_.size());
  const int m = inequality_count();
  if (static_cast<int>(v0.size()) != n) throw std::logic_error("barrier: bad start size");
  if (!interior(v0)) throw std::logic_error("barrier: start point is not strictly interior");

  std::vector<double> v = std::move(v0);
  Outcome out;
  auto objective = [&](const std::vector<double>& w) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += cost_[i] * w[i];
    return s;
  };

  Matrix h(n, n);
  std::vector<double> grad(n);
  std::vector<double> delta(n);
  std::vector<std::vector<double>> eq_dense(p, std::vector<double>(n, 0.0));
  for (int e = 0; e < p; ++e)
    for (std::size_t j = 0; j < eq_[e].idx.size(); ++j) eq_dense[e][eq_[e].idx[j]] = eq_[e].coef[j];

  bool stalled = false;
  for (double mu = opts.mu_initial;; mu *= opts.mu_shrink) {
    const bool last_stage = mu * opts.mu_shrink < opts.mu_final;
    bool centered = false;
    stalled = false;
    for (int it = 0; it < opts.max_newton_per_stage; ++it) {
      // Assemble gradient and Hessian of cost.v + mu*phi.
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t r = 0; r < h.rows() * h.cols(); ++r) h.data()[r] = 0.0;
      for (int i = 0; i < n; ++i) grad[i] = cost_[i];

      for (int i : nonneg_) {
        grad[i] -= mu / v[i];
        h(i, i) += mu / (v[i] * v[i]);
      }
      for (const auto& row : linear_) {
        double a = -row.rhs;
        for (std::size_t j = 0; j < row.idx.size(); ++j) a += row.coef[j] * v[row.idx[j]];
        const double inv = 1.0 / (-a);
        const double inv2 = inv * inv;
        for (std::size_t j = 0; j < row.idx.size(); ++j) {
          grad[row.idx[j]] += mu * row.coef[j] * inv;
          for (std::size_t l = 0; l <= j; ++l) {
            const double w = mu * row.coef[j] * row.coef[l] * inv2;
            h(row.idx[j], row.idx[l]) += w;
            if (l != j) h(row.idx[l], row.idx[j]) += w;
          }
        }
      }
      for (const auto& b : bc_) {
        const std::size_t k = b.flow_idx.size();
        const double t = v[b.t_idx];
        const double fval = bc_value(b, v);
        // u_j = w_j exp(T_j); G_j = prefix sums give dF/dR_j.
        std::vector<double> rates(k), gpref(k);
        double tail = 0.0;
        for (std::size_t j = k; j-- > 0;) {
          rates[j] = v[b.flow_idx[j]] / t;
          tail += rates[j];
          gpref[j] = b.weights[j] * std::exp(tail);  // holds u_j for now
        }
        double fr = -b.w_base;
        for (std::size_t j = 0; j < k; ++j) fr += gpref[j];
        for (std::size_t j = 1; j < k; ++j) gpref[j] += gpref[j - 1];
        double r_dot_g = 0.0;
        for (std::size_t j = 0; j < k; ++j) r_dot_g += rates[j] * gpref[j];

        // Gradient of f: df/dx_j = G_j, df/dt = F - R.G - snr, df/ds = -1.
        std::vector<double> gf(k + 2);
        for (std::size_t j = 0; j < k; ++j) gf[j] = gpref[j];
        gf[k] = fr - r_dot_g - b.snr;
        gf[k + 1] = b.s_idx >= 0 ? -1.0 : 0.0;

        // Hessian of f over (x, t): [M, -M R; -R'M, R'M R]/t with M_jl = G_min(j,l).
        std::vector<double> hrow(k);  // h_j = (M R)_j
        for (std::size_t j = 0; j < k; ++j) {
          double s = 0.0;
          for (std::size_t l = 0; l < k; ++l) s += gpref[std::min(j, l)] * rates[l];
          hrow[j] = s;
        }
        double rmr = 0.0;
        for (std::size_t j = 0; j < k; ++j) rmr += rates[j] * hrow[j];

        const double inv = 1.0 / (-fval);
        const double inv2 = inv * inv;
        auto vidx = [&](std::size_t j) -> int {
          if (j < k) return b.flow_idx[j];
          return j == k ? b.t_idx : b.s_idx;
        };
        const std::size_t dim = b.s_idx >= 0 ? k + 2 : k + 1;
        for (std::size_t j = 0; j < dim; ++j) grad[vidx(j)] += mu * gf[j] * inv;
        for (std::size_t j = 0; j < dim; ++j)
          for (std::size_t l = 0; l < dim; ++l) {
            double w = mu * gf[j] * gf[l] * inv2;
            if (j < k && l < k)
              w += mu * inv * gpref[std::min(j, l)] / t;
            else if (j < k && l == k)
              w -= mu * inv * hrow[j] / t;
            else if (j == k && l < k)
              w -= mu * inv * hrow[l] / t;
            else if (j == k && l == k)
              w += mu * inv * rmr / t;
            h(vidx(j), vidx(l)) += w;
          }
      }

      // Equality-constrained Newton step via the Schur complement.
      double max_diag = 0.0;
      for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, h(i, i));
      double reg = max_diag * 1e-14;
      Matrix chol;
      for (;; reg *= 100.0) {
        chol = h;
        for (int i = 0; i < n; ++i) chol(i, i) += reg;
        if (cholesky_factor(chol, 0.0)) break;
        if (reg > max_diag) throw std::logic_error("barrier: hessian factorization failed");
        if (reg == 0.0) reg = std::max(max_diag, 1.0) * 1e-14;
      }

      std::vector<double> yg = grad;
      cholesky_solve(chol, yg);
      std::vector<std::vector<double>> ye(p);
      for (int e = 0; e < p; ++e) {
        ye[e] = eq_dense[e];
        cholesky_solve(chol, ye[e]);
      }
      // r = b - A v (kept near zero; corrected each step)
      std::vector<double> resid(p);
      for (int e = 0; e < p; ++e) {
        double av = 0.0;
        for (std::size_t j = 0; j < eq_[e].idx.size(); ++j)
          av += eq_[e].coef[j] * v[eq_[e].idx[j]];
        resid[e] = eq_rhs_[e] - av;
      }
      std::vector<double> w(p, 0.0);
      if (p > 0) {
        Matrix schur(p, p);
        for (int a = 0; a < p; ++a)
          for (int bq = 0; bq <= a; ++bq) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += eq_dense[a][i] * ye[bq][i];
            schur(a, bq) = s;
            schur(bq, a) = s;
          }
        std::vector<double> rhs(p);
        for (int a = 0; a < p; ++a) {
          double s = 0.0;
          for (int i = 0; i < n; ++i) s += eq_dense[a][i] * yg[i];
          rhs[a] = -s - resid[a];
        }
        if (!cholesky_factor(schur, 0.0))
          throw std::logic_error("barrier: equality rows are rank deficient");
        cholesky_solve(schur, rhs);
        w = rhs;
      }
      for (int i = 0; i < n; ++i) {
        double d = -yg[i];
        for (int e = 0; e < p; ++e) d -= ye[e][i] * w[e];
        delta[i] = d;
      }

      double lambda2 = 0.0;
      for (int i = 0; i < n; ++i) lambda2 -= grad[i] * delta[i];
      lambda2 = std::max(lambda2, 0.0);
      if (0.5 * lambda2 < opts.newton_tol) {
        centered = true;
        break;
      }

      // Ratio test on the closed-form constraints, then backtracking on the
      // potential with a strict-interior guard (covers the BC blocks).
      double alpha = 1.0;
      for (int i : nonneg_)
        if (delta[i] < 0.0) alpha = std::min(alpha, -0.99 * v[i] / delta[i]);
      for (const auto& row : linear_) {
        double a = -row.rhs, da = 0.0;
        for (std::size_t j = 0; j < row.idx.size(); ++j) {
          a += row.coef[j] * v[row.idx[j]];
          da += row.coef[j] * delta[row.idx[j]];
        }
        if (da > 0.0) alpha = std::min(alpha, 0.99 * (-a) / da);
      }
      const double psi0 = potential(v, mu);
      std::vector<double> trial(n);
      bool moved = false;
      for (; alpha > 1e-16; alpha *= 0.5) {
        for (int i = 0; i < n; ++i) trial[i] = v[i] + alpha * delta[i];
        const double psi = potential(trial, mu);
        if (psi <= psi0 - 0.25 * alpha * lambda2) {
          v.swap(trial);
          moved = true;
          break;
        }
      }
      ++out.newton_steps;
      if (!moved) {
        stalled = 0.5 * lambda2 > 1e-6;
        centered = !stalled;
        break;
      }
      if (opts.early_exit && objective(v) < opts.feasible_below) {
        out.status = Status::EarlyFeasible;
        out.v = std::move(v);
        out.objective = objective(out.v);
        return out;
      }
    }

    // The duality-gap bound objective - s* <= m*mu only holds near the
    // central path, so the certificate is trusted only for centered stages.
    if (opts.early_exit && centered && objective(v) - m * mu > opts.infeasible_above) {
      out.status = Status::EarlyInfeasible;
      out.v = std::move(v);
      out.objective = objective(out.v);
      return out;
    }
    if (last_stage || mu <= opts.mu_final) break;
  }

  out.status = stalled ? Status::Stalled : Status::Converged;
  out.objective = objective(v);
  out.v = std::move(v);
  return out;
}

std::string BarrierProgram::debug_json(const std::vector<double>& v, double mu) const {
  nlohmann::json doc;
  nlohmann::json rows = nlohmann::json::array();
  auto push = [&](const std::string& kind, int index, double value) {
    rows.push_back({{"kind", kind},
                    {"index", index},
                    {"value", value},
                    {"multiplier", value < 0.0 ? mu / -value : kInf}});
  };
  int k = 0;
  for (int i : nonneg_) push("nonneg", i, -v[i]), ++k;
  for (std::size_t r = 0; r < linear_.size(); ++r) {
    double a = -linear_[r].rhs;
    for (std::size_t j = 0; j < linear_[r].idx.size(); ++j)
      a += linear_[r].coef[j] * v[linear_[r].idx[j]];
    push("linear", static_cast<int>(r), a);
  }
  for (std::size_t b = 0; b < bc_.size(); ++b) push("bc", static_cast<int>(b), bc_value(bc_[b], v));
  doc["constraints"] = rows;
  nlohmann::json eqs = nlohmann::json::array();
  for (std::size_t e = 0; e < eq_.size(); ++e) {
    double av = 0.0;
    for (std::size_t j = 0; j < eq_[e].idx.size(); ++j) av += eq_[e].coef[j] * v[eq_[e].idx[j]];
    eqs.push_back({{"index", e}, {"residual", eq_rhs_[e] - av}});
  }
  doc["equalities"] = eqs;
  doc["mu"] = mu;
  return doc.dump(2);
}

}  // namespace relay
