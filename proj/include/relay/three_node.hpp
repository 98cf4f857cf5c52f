#pragma once

namespace relay {

enum class Strategy { Direct, Relayed };

// Optimum of the three-node flow program: source node, one relay, destination.
struct ThreeNodeResult {
  double rate = 0.0;  // nats
  Strategy strategy = Strategy::Direct;
  double t2_opt = 0.0;
  double alpha_bar_opt = 0.0;
  double x1 = 0.0;  // source->destination flow in the broadcast slot
  double x2 = 0.0;  // source->relay flow in the broadcast slot
  double x3 = 0.0;  // source->destination flow in the MA slot
  double x4 = 0.0;  // relay->destination flow in the MA slot (= x2)
};

// Largest relay-transmit slot fraction for which the direct-link MA
// constraint stays tight: C(Z_SR S) / [C(Z_SR S) + C(Z_RD S + Z_SD S) - C(Z_SD S)].
double t2_max(double z_sd, double z_sr, double z_rd, double snr);

struct RelayedPoint {
  double rate = 0.0;
  double alpha_bar = 0.0;
  double x1 = 0.0, x2 = 0.0, x3 = 0.0, x4 = 0.0;
};

// Maximum rate at a fixed relay-slot length t2 <= t2_max, for Z_SD < Z_SR.
// Throws std::domain_error outside the valid range.
RelayedPoint rate_given_t2(double z_sd, double z_sr, double z_rd, double snr, double t2);

ThreeNodeResult solve_three_node(double z_sd, double z_sr, double z_rd, double snr);

}  // namespace relay
