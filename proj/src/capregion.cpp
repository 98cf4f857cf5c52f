#include "relay/capregion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "relay/netmodel.hpp"

namespace relay {

double bc_cascade_min_snr(const std::vector<std::pair<double, double>>& gain_rate_desc) {
  // Superposition coding: decode from the weakest receiver up. With
  // receivers ordered strongest first, the cumulative power after serving
  // receiver k satisfies Q_k = e^{R_k} Q_{k-1} + (e^{R_k} - 1)/Z_k.
  double q = 0.0;
  for (const auto& [z, r] : gain_rate_desc) {
    if (r == 0.0) continue;
    const double e = std::exp(r);
    if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
    q = e * q + (e - 1.0) / z;
  }
  return q;
}

double bc_min_snr(const BcDemand& demand, const Matrix& gains) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> live;  // (gain, per-slot rate)
  live.reserve(demand.targets.size());
  for (const auto& [node, flow] : demand.targets) {
    if (flow < 0.0) throw std::domain_error("bc_min_snr: negative flow");
    const double z = gains(demand.tx, node);
    if (z < kDeadGain || demand.slot_length <= 0.0) {
      if (flow > 0.0) return inf;
      continue;
    }
    live.emplace_back(z, flow / demand.slot_length);
  }
  if (live.empty()) return 0.0;
  std::stable_sort(live.begin(), live.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  return bc_cascade_min_snr(live);
}

bool ma_feasible(const MaDemand& demand, const Matrix& gains, double snr) {
  const int m = static_cast<int>(demand.sources.size());
  const double t = demand.slot_length;
  for (const auto& [node, flow] : demand.sources) {
    (void)node;
    if (flow < 0.0) return false;
  }
  if (t <= 0.0) {
    for (const auto& [node, flow] : demand.sources) {
      (void)node;
      if (flow > 0.0) return false;
    }
    return true;
  }
  // Absolute slack absorbs roundoff on demands constructed to sit exactly on
  // the polymatroid boundary.
  const double slack = 1e-12;
  for (unsigned subset = 1; subset < (1u << m); ++subset) {
    double flow_sum = 0.0, gain_sum = 0.0;
    for (int i = 0; i < m; ++i)
      if ((subset >> i) & 1u) {
        flow_sum += demand.sources[i].second;
        gain_sum += gains(demand.sources[i].first, demand.rx);
      }
    if (flow_sum > t * std::log1p(snr * gain_sum) + slack) return false;
  }
  return true;
}

std::pair<double, double> bc_boundary_rate_pair(double z_a, double z_b, double t, double alpha,
                                                double snr) {
  if (alpha < 0.0 || alpha > 1.0) throw std::domain_error("bc_boundary_rate_pair: alpha outside [0,1]");
  if (t < 0.0) throw std::domain_error("bc_boundary_rate_pair: negative slot length");
  const double beta = 1.0 - alpha;
  if (z_a >= z_b) {
    // a is the degraded-order strong receiver: it gets a clean channel, b
    // sees a's power as noise.
    const double xa = t * std::log1p(z_a * alpha * snr);
    const double xb = t * std::log1p(z_b * beta * snr / (1.0 + z_b * alpha * snr));
    return {xa, xb};
  }
  const double xa = t * std::log1p(z_a * alpha * snr / (1.0 + z_a * beta * snr));
  const double xb = t * std::log1p(z_b * beta * snr);
  return {xa, xb};
}

}  // namespace relay
