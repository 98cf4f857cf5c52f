#pragma once

#include <utility>
#include <vector>

#include "relay/linalg.hpp"

namespace relay {

// Receivers below this gain cannot carry flow at any finite SNR; they are
// kept out of the superposition cascade and treated as zero-capacity links.
inline constexpr double kDeadGain = 1e-12;

struct BcDemand {
  int tx = 0;
  std::vector<std::pair<int, double>> targets;  // (receiver, flow over the whole interval)
  double slot_length = 0.0;
};

struct MaDemand {
  int rx = 0;
  std::vector<std::pair<int, double>> sources;  // (transmitter, flow over the whole interval)
  double slot_length = 0.0;
};

// Minimum total SNR for a degraded Gaussian broadcast channel to carry the
// given per-receiver rates (nats per slot-time), receivers listed in
// decreasing-gain order. Order-sensitive kernel; bc_min_snr sorts first.
double bc_cascade_min_snr(const std::vector<std::pair<double, double>>& gain_rate_desc);

// Minimum SNR for the demand's broadcast slot. Returns 0 for a zero-length
// slot with zero flows and +infinity when the demand is unsatisfiable at any
// finite SNR (zero-length slot or dead receiver asked to carry flow).
double bc_min_snr(const BcDemand& demand, const Matrix& gains);

inline bool bc_feasible(const BcDemand& demand, const Matrix& gains, double snr) {
  return bc_min_snr(demand, gains) <= snr;
}

// Gaussian MA polymatroid with per-source power: every nonempty subset U of
// sources must satisfy sum_U x <= t * C(S * sum_U Z).
bool ma_feasible(const MaDemand& demand, const Matrix& gains, double snr);

// Boundary of the two-receiver BC region at power split alpha: alpha is the
// fraction of power spent on receiver a, and the stronger receiver decodes
// the weaker one's signal first. Returns (x_a, x_b) over interval length t.
std::pair<double, double> bc_boundary_rate_pair(double z_a, double z_b, double t, double alpha,
                                                double snr);

}  // namespace relay
