#include "relay/three_node.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "relay/netmodel.hpp"

namespace relay {

namespace {

constexpr int kBracketGridPoints = 200;
constexpr double kGoldenTol = 1e-9;
constexpr double kDenseFallbackStep = 1e-5;
constexpr double kGolden = 0.6180339887498949;  // 1/phi

struct Precomp {
  double c_sd;     // C(Z_SD S)
  double c_ma;     // C(Z_SD S + Z_RD S)
  double log1p_c;  // C(Z_RD S / (1 + Z_SD S)) = c_ma - c_sd
  double zsr_s;
  double zsd_s;
  double ratio;    // Z_SD / Z_SR
};

Precomp precompute(double z_sd, double z_sr, double z_rd, double snr) {
  Precomp p;
  p.zsd_s = z_sd * snr;
  p.zsr_s = z_sr * snr;
  p.c_sd = std::log1p(p.zsd_s);
  p.c_ma = std::log1p((z_sd + z_rd) * snr);
  p.log1p_c = p.c_ma - p.c_sd;
  p.ratio = z_sd / z_sr;
  return p;
}

RelayedPoint eval_relayed(const Precomp& p, double t2) {
  RelayedPoint r;
  const double t1 = 1.0 - t2;
  if (p.log1p_c <= 0.0) {
    // The relay-destination link carries nothing; every split is direct.
    r.rate = p.c_sd;
    r.x1 = t1 * p.c_sd;
    r.x3 = t2 * p.c_sd;
    return r;
  }
  if (t1 <= 0.0) throw std::domain_error("rate_given_t2: t1 = 0 with a usable relay link");
  // q = (1 + Z_RD S / (1 + Z_SD S))^{t2/t1}; q <= 1 + Z_SR S for t2 <= t2_max.
  const double q = std::exp((t2 / t1) * p.log1p_c);
  const double qm1 = q - 1.0;
  r.alpha_bar = qm1 / p.zsr_s;
  r.rate = t1 * (p.c_sd - std::log1p(p.ratio * qm1)) + t2 * p.c_ma;
  r.x2 = t1 * std::log(q);
  r.x1 = t1 * (p.c_sd - std::log1p(p.zsd_s * r.alpha_bar));
  r.x3 = t2 * p.c_sd;
  r.x4 = r.x2;
  return r;
}

// Golden-section ascent of the unimodal rate on [lo, hi]. The bracket
// endpoints stay in the candidate set so boundary maximizers (t2 = t2_max in
// particular) are returned exactly.
double golden_max(const Precomp& p, double lo, double hi) {
  double a = lo, b = hi;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = eval_relayed(p, x1).rate;
  double f2 = eval_relayed(p, x2).rate;
  while (b - a > kGoldenTol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = eval_relayed(p, x1).rate;
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = eval_relayed(p, x2).rate;
    }
  }
  double best = lo, best_val = eval_relayed(p, lo).rate;
  for (double cand : {0.5 * (a + b), hi}) {
    const double v = eval_relayed(p, cand).rate;
    if (v > best_val) {
      best_val = v;
      best = cand;
    }
  }
  return best;
}

}  // namespace

double t2_max(double z_sd, double z_sr, double z_rd, double snr) {
  const double c_sr = capacity(z_sr * snr);
  const double c_ma = capacity((z_rd + z_sd) * snr);
  const double c_sd = capacity(z_sd * snr);
  const double denom = c_sr + c_ma - c_sd;
  if (denom <= 0.0) return 1.0;  // Z_RD = 0 (or S = 0): the MA constraint never binds
  return c_sr / denom;
}

RelayedPoint rate_given_t2(double z_sd, double z_sr, double z_rd, double snr, double t2) {
  if (!(z_sd < z_sr)) throw std::domain_error("rate_given_t2: requires Z_SD < Z_SR");
  const double lim = t2_max(z_sd, z_sr, z_rd, snr);
  if (t2 < 0.0 || t2 > lim + 1e-12) throw std::domain_error("rate_given_t2: t2 outside [0, t2_max]");
  return eval_relayed(precompute(z_sd, z_sr, z_rd, snr), std::min(t2, lim));
}

ThreeNodeResult solve_three_node(double z_sd, double z_sr, double z_rd, double snr) {
  if (z_sd < 0.0 || z_sr < 0.0 || z_rd < 0.0 || !(snr > 0.0))
    throw std::domain_error("solve_three_node: gains must be nonnegative and snr positive");

  ThreeNodeResult res;
  const double direct = capacity(z_sd * snr);
  if (z_sd >= z_sr) {
    res.rate = direct;
    res.x1 = direct;
    return res;
  }

  const Precomp p = precompute(z_sd, z_sr, z_rd, snr);
  const double lim = t2_max(z_sd, z_sr, z_rd, snr);

  // Bracket via a uniform grid, taking the smallest index on ties.
  const int n = kBracketGridPoints;
  std::vector<double> vals(n + 1);
  int best = 0;
  int maxima = 0;
  for (int i = 0; i <= n; ++i) {
    vals[i] = eval_relayed(p, lim * i / n).rate;
    if (vals[i] > vals[best] + 1e-15) best = i;
  }
  for (int i = 1; i < n; ++i)
    if (vals[i] > vals[i - 1] + 1e-12 && vals[i] > vals[i + 1] + 1e-12) ++maxima;

  double t2_star;
  if (maxima > 1) {
    // The coarse grid saw more than one local maximum; rescan densely
    // before the local refinement.
    const int dense = static_cast<int>(std::lround(1.0 / kDenseFallbackStep));
    int dbest = 0;
    double dval = vals[0];
    for (int i = 1; i <= dense; ++i) {
      const double v = eval_relayed(p, lim * i / dense).rate;
      if (v > dval + 1e-15) {
        dval = v;
        dbest = i;
      }
    }
    const double step = lim / dense;
    t2_star = golden_max(p, std::max(0.0, dbest * step - step), std::min(lim, dbest * step + step));
  } else {
    const double lo = lim * std::max(0, best - 1) / n;
    const double hi = lim * std::min(n, best + 1) / n;
    t2_star = golden_max(p, lo, hi);
  }

  RelayedPoint pt = eval_relayed(p, t2_star);
  if (t2_star <= 1e-12 || pt.rate <= direct + 1e-13) {
    res.rate = direct;
    res.x1 = direct;
    return res;
  }
  res.rate = pt.rate;
  res.strategy = Strategy::Relayed;
  res.t2_opt = t2_star;
  res.alpha_bar_opt = pt.alpha_bar;
  res.x1 = pt.x1;
  res.x2 = pt.x2;
  res.x3 = pt.x3;
  res.x4 = pt.x4;
  return res;
}

}  // namespace relay
