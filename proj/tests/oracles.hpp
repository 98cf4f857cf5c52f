// Test-only oracles: brute-force and quadrature references kept independent
// of the library implementation paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "relay/flowgraph.hpp"
#include "relay/netmodel.hpp"

namespace relay::test {

// Maximum of the three-node program over a (t2, alpha-bar) grid, evaluating
// the original constraint set directly: boundary broadcast pairs, the relay
// MA budget x4 = x2 <= t2 C(Z_RD S), and the destination MA constraints.
// Coarse scan plus one local refinement around the best cell.
inline double three_node_grid_rate(double zsd, double zsr, double zrd, double snr,
                                   int t2_points = 400, double abar_step = 1e-4) {
  const double c_rd = std::log1p(zrd * snr);
  const double c_sd = std::log1p(zsd * snr);
  const double c_ma = std::log1p((zsd + zrd) * snr);

  auto eval = [&](double t2, double abar) {
    const double t1 = 1.0 - t2;
    double x1 = 0.0, x2 = 0.0;
    if (t1 > 1e-15) {
      const double alpha = 1.0 - abar;
      if (zsr > zsd) {
        x2 = t1 * std::log1p(zsr * abar * snr);
        x1 = t1 * std::log1p(zsd * alpha * snr / (1.0 + zsd * abar * snr));
      } else {
        x1 = t1 * std::log1p(zsd * alpha * snr);
        x2 = t1 * std::log1p(zsr * abar * snr / (1.0 + zsr * alpha * snr));
      }
    }
    const double x2c = std::min(x2, t2 * c_rd);
    const double x3 = std::max(0.0, std::min(t2 * c_sd, t2 * c_ma - x2c));
    return x1 + x2c + x3;
  };

  const int na = static_cast<int>(std::lround(1.0 / abar_step));
  double best = 0.0;
  int bi = 0, bj = 0;
  for (int i = 0; i <= t2_points; ++i) {
    const double t2 = static_cast<double>(i) / t2_points;
    for (int j = 0; j <= na; ++j) {
      const double v = eval(t2, static_cast<double>(j) / na);
      if (v > best) {
        best = v;
        bi = i;
        bj = j;
      }
    }
  }
  // Refine two grid cells around the coarse maximizer.
  const double dt = 1.0 / t2_points, da = 1.0 / na;
  const double t_lo = std::max(0.0, bi * dt - 2.0 * dt), t_hi = std::min(1.0, bi * dt + 2.0 * dt);
  const double a_lo = std::max(0.0, bj * da - 2.0 * da), a_hi = std::min(1.0, bj * da + 2.0 * da);
  for (int i = 0; i <= 160; ++i)
    for (int j = 0; j <= 800; ++j)
      best = std::max(best, eval(t_lo + (t_hi - t_lo) * i / 160.0,
                                 a_lo + (a_hi - a_lo) * j / 800.0));
  return best;
}

// Same scan at fixed t2 (alpha grid only).
inline double three_node_grid_rate_fixed_t2(double zsd, double zsr, double zrd, double snr,
                                            double t2, double abar_step = 1e-5) {
  const double c_rd = std::log1p(zrd * snr);
  const double c_sd = std::log1p(zsd * snr);
  const double c_ma = std::log1p((zsd + zrd) * snr);
  auto eval = [&](double abar) {
    const double t1 = 1.0 - t2;
    const double alpha = 1.0 - abar;
    double x1, x2;
    if (zsr > zsd) {
      x2 = t1 * std::log1p(zsr * abar * snr);
      x1 = t1 * std::log1p(zsd * alpha * snr / (1.0 + zsd * abar * snr));
    } else {
      x1 = t1 * std::log1p(zsd * alpha * snr);
      x2 = t1 * std::log1p(zsr * abar * snr / (1.0 + zsr * alpha * snr));
    }
    const double x2c = std::min(x2, t2 * c_rd);
    const double x3 = std::max(0.0, std::min(t2 * c_sd, t2 * c_ma - x2c));
    return x1 + x2c + x3;
  };
  const int na = static_cast<int>(std::lround(1.0 / abar_step));
  double best = 0.0;
  int bj = 0;
  for (int j = 0; j <= na; ++j) {
    const double v = eval(static_cast<double>(j) / na);
    if (v > best) {
      best = v;
      bj = j;
    }
  }
  const double da = 1.0 / na;
  const double a_lo = std::max(0.0, bj * da - 2.0 * da), a_hi = std::min(1.0, bj * da + 2.0 * da);
  for (int j = 0; j <= 4000; ++j)
    best = std::max(best, eval(a_lo + (a_hi - a_lo) * j / 4000.0));
  return best;
}

// Smallest SNR at which three degraded-BC receivers (gains z1 >= z2 >= z3)
// can carry per-slot rates (r1, r2, r3): bisection on S with a grid search
// over the strongest user's power share; the middle user's share is pinned
// at the smallest value meeting r2 (any excess only hurts the weakest).
inline double bc_three_receiver_grid_min_snr(double z1, double z2, double z3, double r1, double r2,
                                             double r3) {
  auto feasible = [&](double s) {
    const int n = 1000000;
    const int i0 = std::max(0, static_cast<int>(std::expm1(r1) / (z1 * s) * n));
    for (int i = i0; i <= n; ++i) {
      const double a1 = static_cast<double>(i) / n;
      if (std::log1p(z1 * a1 * s) < r1) continue;
      const double a2 = (std::expm1(r2)) * (1.0 + z2 * a1 * s) / (z2 * s);
      const double a3 = 1.0 - a1 - a2;
      if (a3 < 0.0) return false;  // larger a1 only shrinks what is left
      if (std::log1p(z3 * a3 * s / (1.0 + z3 * (a1 + a2) * s)) >= r3) return true;
    }
    return false;
  };
  double lo = 0.0, hi = 1.0;
  while (!feasible(hi)) hi *= 2.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

// Adaptive Simpson quadrature of t^(a-1) e^-t on [0, x], normalized by
// Gamma(a).
inline double regularized_gamma_quadrature(double a, double x) {
  std::function<double(double)> f = [a](double t) {
    return t <= 0.0 ? 0.0 : std::exp((a - 1.0) * std::log(t) - t);
  };
  std::function<double(double, double, double, double, double, double, int)> simpson =
      [&](double lo, double hi, double flo, double fhi, double fmid, double whole,
          int depth) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    const double flm = f(lm), frm = f(rm);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    if (depth > 48 || std::abs(left + right - whole) < 1e-15 * (1.0 + std::abs(whole)))
      return left + right + (left + right - whole) / 15.0;
    return simpson(lo, mid, flo, fmid, flm, left, depth + 1) +
           simpson(mid, hi, fmid, fhi, frm, right, depth + 1);
  };
  if (x <= 0.0) return 0.0;
  const double fmid = f(0.5 * x);
  const double whole = x / 6.0 * (f(0.0) + 4.0 * fmid + f(x));
  const double integral = simpson(0.0, x, f(0.0), f(x), fmid, whole, 0);
  return integral / std::tgamma(a);
}

// Conserving random allocation over the canonical schedule, built from
// source-to-destination path flows plus a few inter-relay circulations.
inline FlowAllocation random_conserving_allocation(int n_nodes, SubstreamRng& rng,
                                                   int n_paths = 10) {
  FlowAllocation alloc(canonical_schedule(n_nodes));
  const int dest = n_nodes - 1;
  auto bump = [&](int slot, int from, int to, double amount) {
    alloc.set_flow(slot, from, to, alloc.flow(slot, from, to) + amount);
  };
  // Slot holding a hop: the sender's broadcast slot or the receiver's MA
  // slot (canonical order: S-BC = 0, relay r MA/BC = 2r-1 / 2r, D-MA last).
  auto hop_slot = [&](int from, int to, bool sender_side) {
    if (sender_side) return from == 0 ? 0 : 2 * from;
    return to == dest ? 2 * n_nodes - 3 : 2 * to - 1;
  };
  for (int p = 0; p < n_paths; ++p) {
    const double amount = 0.05 + 0.3 * rng.next_unit();
    int cur = 0;
    std::vector<bool> visited(n_nodes, false);
    while (cur != dest) {
      std::vector<int> options{dest};
      for (int r = 1; r <= n_nodes - 2; ++r)
        if (r != cur && !visited[r]) options.push_back(r);
      const int next = options[rng.next_u64() % options.size()];
      bump(hop_slot(cur, next, rng.next_u64() & 1u), cur, next, amount);
      visited[next] = true;
      cur = next;
    }
  }
  // Inter-relay circulation: conserving by construction.
  if (n_nodes >= 4) {
    for (int p = 0; p < 3; ++p) {
      const int a = 1 + static_cast<int>(rng.next_u64() % (n_nodes - 2));
      int b = 1 + static_cast<int>(rng.next_u64() % (n_nodes - 2));
      if (a == b) b = a == 1 ? 2 : 1;
      const double amount = 0.1 * rng.next_unit();
      bump(rng.next_u64() & 1u ? 2 * a : 2 * b - 1, a, b, amount);
      bump(rng.next_u64() & 1u ? 2 * b : 2 * a - 1, b, a, amount);
    }
  }
  return alloc;
}

}  // namespace relay::test
