#include "relay/netmodel.hpp"

#include <cmath>

namespace relay {

double capacity(double x) {
  if (x < 0.0) throw std::domain_error("capacity: negative argument");
  return std::log1p(x);
}

double db_to_linear(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

SubstreamRng::SubstreamRng(std::uint64_t seed, std::uint64_t stream_id) {
  // Decorrelate substreams by running the stream id through the mixer twice
  // before folding in the seed.
  std::uint64_t s = stream_id;
  std::uint64_t a = splitmix64(s);
  s = a ^ seed;
  (void)splitmix64(s);
  state_ = s;
}

std::uint64_t SubstreamRng::next_u64() { return splitmix64(state_); }

double SubstreamRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SubstreamRng::next_exponential(double mean) {
  if (!(mean > 0.0)) throw ConfigError("exponential draw requires a positive mean");
  // u in [0,1) so log1p(-u) is finite.
  return -mean * std::log1p(-next_unit());
}

void NetworkInstance::validate() const {
  if (n_nodes < 3) throw ConfigError("network needs at least 3 nodes");
  if (mean_gains.rows() != static_cast<std::size_t>(n_nodes) ||
      mean_gains.cols() != static_cast<std::size_t>(n_nodes))
    throw ConfigError("mean gain matrix size does not match n_nodes");
  if (gains.rows() != static_cast<std::size_t>(n_nodes) ||
      gains.cols() != static_cast<std::size_t>(n_nodes))
    throw ConfigError("gain matrix size does not match n_nodes");
  for (int i = 0; i < n_nodes; ++i)
    for (int j = 0; j < n_nodes; ++j) {
      if (i == j) continue;
      if (!(mean_gains(i, j) > 0.0)) throw ConfigError("mean gains must be positive");
      if (gains(i, j) < 0.0) throw ConfigError("gains must be nonnegative");
    }
  if (!(snr > 0.0)) throw ConfigError("snr must be positive");
}

Matrix uniform_means(int n_nodes) {
  if (n_nodes < 3) throw ConfigError("network needs at least 3 nodes");
  Matrix m(n_nodes, n_nodes, 1.0);
  for (int i = 0; i < n_nodes; ++i) m(i, i) = 0.0;
  return m;
}

namespace {

Matrix four_node_means(double sr1, double sr2, double sd, double r1r2, double r1d, double r2d) {
  Matrix m = uniform_means(4);
  auto set = [&m](int a, int b, double v) { m(a, b) = v; m(b, a) = v; };
  set(0, 1, sr1);
  set(0, 2, sr2);
  set(0, 3, sd);
  set(1, 2, r1r2);
  set(1, 3, r1d);
  set(2, 3, r2d);
  return m;
}

}  // namespace

Matrix case_a_means() { return four_node_means(2.0, 2.0, 1.0, 1.0, 1.5, 1.0); }
Matrix case_b_means() { return four_node_means(1.5, 0.75, 1.0, 3.5, 0.2, 3.0); }

Matrix means_from_preset(const std::string& name, int n_nodes) {
  if (name == "uniform") return uniform_means(n_nodes);
  if (name == "caseA" || name == "caseB") {
    if (n_nodes != 4) throw ConfigError("preset '" + name + "' is defined for 4 nodes");
    return name == "caseA" ? case_a_means() : case_b_means();
  }
  throw ConfigError("unknown mean-gain preset '" + name + "'");
}

Matrix sample_gains(const Matrix& means, SubstreamRng& rng) {
  const std::size_t n = means.rows();
  Matrix z(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      z(i, j) = rng.next_exponential(means(i, j));
    }
  return z;
}

NetworkInstance make_instance(const Matrix& means, double snr, SubstreamRng& rng) {
  NetworkInstance net;
  net.n_nodes = static_cast<int>(means.rows());
  net.mean_gains = means;
  net.gains = sample_gains(means, rng);
  net.snr = snr;
  net.validate();
  return net;
}

}  // namespace relay
