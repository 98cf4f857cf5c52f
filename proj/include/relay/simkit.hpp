#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relay/bounds.hpp"
#include "relay/netmodel.hpp"
#include "relay/protocols.hpp"

namespace relay {

enum class RateMode { FixedRate, Multiplexing };

struct Experiment {
  int n_nodes = 4;
  Matrix mean_gains;
  std::vector<ProtocolId> protocols;
  bool analytic_lower = false;      // also emit the "ma-cut-lb" curve
  RateMode mode = RateMode::FixedRate;
  std::vector<double> rates_bits;   // FixedRate targets (bits/s/Hz)
  std::vector<double> mux_gains;    // Multiplexing targets r, rate = r log S
  std::vector<double> snr_db;       // strictly increasing grid
  long trials = 10000;
  std::uint64_t seed = 1;
  int workers = 1;                  // 0 = hardware concurrency
  double max_flagged_fraction = 1e-3;

  void validate() const;  // throws ConfigError
};

struct OutagePoint {
  double snr_db = 0.0;
  double rate_bits = 0.0;
  long trials = 0;
  long outages = 0;
  long flagged = 0;    // solver-diagnostic trials, excluded from the estimate
  double p_hat = 0.0;
  double ci_lo = 0.0;  // Wilson 95%
  double ci_hi = 0.0;
};

struct OutageCurve {
  std::string protocol;  // csv id, or "ma-cut-lb" for the analytic bound
  double rate_bits = 0.0;
  std::optional<double> mux_r;
  std::vector<OutagePoint> points;
};

class SolverBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs the sweep. Deterministic for a given seed regardless of worker count;
// throws SolverBudgetError when more than max_flagged_fraction of trials got
// flagged by solver diagnostics.
std::vector<OutageCurve> run_experiment(const Experiment& exp);

Experiment experiment_from_json(const std::string& json_text);
Experiment experiment_from_file(const std::string& path);

struct WilsonInterval {
  double lo = 0.0, hi = 1.0;
};
WilsonInterval wilson95(long successes, long trials);

// Least-squares slope of -log10 p versus log10 S over the window; needs at
// least three points with p > 0, otherwise throws.
double estimate_dmt_slope(const OutageCurve& curve, double snr_lo_db, double snr_hi_db);

// SNR (dB) where the curve crosses p_target, log-linear interpolation.
std::optional<double> snr_db_at_outage(const OutageCurve& curve, double p_target);

// Columns: protocol,snr_db,rate_bits,trials,outages,p_hat,ci_lo,ci_hi.
void emit_csv(const std::vector<OutageCurve>& curves, const std::string& path);
std::vector<OutageCurve> parse_csv(const std::string& path);
std::string gnuplot_script(const std::vector<OutageCurve>& curves);

// Deep-tail outage estimator for the diversity-slope window: conditions on
// the necessary event Z_SD < (e^R - 1)/S (every protocol here dominates
// direct transmission) and samples the source-relay / relay-destination
// gains from a two-sided exponential-tilt mixture with bounded weights.
// Unbiased for the same outage probability as run_experiment.
struct TailPoint {
  double p_hat = 0.0;
  double std_err = 0.0;
  long samples = 0;
};
std::map<ProtocolId, TailPoint> estimate_outage_tail(int n_nodes, const Matrix& means,
                                                     const std::vector<ProtocolId>& protocols,
                                                     double rate_nats, double snr, long samples,
                                                     std::uint64_t seed, int workers = 1);

}  // namespace relay
