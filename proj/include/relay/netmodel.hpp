#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "relay/linalg.hpp"

namespace relay {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All rates inside the library are in nats per unit time: the broadcast
// power formulas use e^{x/t}, which forces natural logs. Conversion to
// bits/s/Hz happens only at the reporting boundary.
inline constexpr double kNatsPerBit = 0.69314718055994530942;

// C(x) = ln(1 + x). Throws std::domain_error for x < 0.
double capacity(double x);

double db_to_linear(double snr_db);
inline double bits_to_nats(double bits) { return bits * kNatsPerBit; }
inline double nats_to_bits(double nats) { return nats / kNatsPerBit; }

struct RandomSource {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

// Deterministic substream generator built on splitmix64. Identical
// (seed, stream_id) reproduce identical draw sequences regardless of how
// trials are spread over worker threads.
class SubstreamRng {
 public:
  SubstreamRng(std::uint64_t seed, std::uint64_t stream_id);
  explicit SubstreamRng(RandomSource src) : SubstreamRng(src.seed, src.stream_id) {}

  std::uint64_t next_u64();
  double next_unit();                      // uniform in [0, 1)
  double next_exponential(double mean);    // mean > 0

 private:
  std::uint64_t state_;
};

// Node convention shared by every module: index 0 is the source, index
// n_nodes-1 the destination, indices 1..n_nodes-2 the relays.
struct NetworkInstance {
  int n_nodes = 0;
  Matrix mean_gains;  // off-diagonal > 0, diagonal never read
  Matrix gains;       // one fading realization Z_ij >= 0
  double snr = 0.0;   // linear transmit SNR S

  int source() const { return 0; }
  int destination() const { return n_nodes - 1; }
  int relay_count() const { return n_nodes - 2; }

  void validate() const;  // throws ConfigError on any broken invariant
};

Matrix uniform_means(int n_nodes);
// Four-node non-uniform presets (source, relay 1, relay 2, destination).
Matrix case_a_means();
Matrix case_b_means();
// name in {"uniform", "caseA", "caseB"}; presets require n_nodes == 4.
Matrix means_from_preset(const std::string& name, int n_nodes);

// Each off-diagonal entry drawn independently Exponential(mean). Z_ij and
// Z_ji are independent draws. Throws ConfigError on a nonpositive mean.
Matrix sample_gains(const Matrix& means, SubstreamRng& rng);

NetworkInstance make_instance(const Matrix& means, double snr, SubstreamRng& rng);

// Parses a network description {"n_nodes": int, "means": "uniform"|"caseA"|
// "caseB"|[[...]]} and returns the mean matrix; n_nodes is written through.
Matrix means_from_config_json(const std::string& json_text, int* n_nodes_out);

}  // namespace relay
