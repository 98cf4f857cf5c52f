#include "relay/simkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

namespace relay {

namespace {

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(chunk_index) over [0, n_chunks) on a small pool. Chunk indices are
// claimed atomically; each chunk writes only its own output slot, so results
// are independent of scheduling.
void run_chunks(long n_chunks, int workers, const std::function<void(long)>& fn) {
  if (workers <= 1 || n_chunks <= 1) {
    for (long c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::atomic<long> next{0};
  auto worker = [&]() {
    for (;;) {
      const long c = next.fetch_add(1);
      if (c >= n_chunks) return;
      fn(c);
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = static_cast<int>(std::min<long>(workers, n_chunks));
  pool.reserve(n_threads);
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

struct TrialCounts {
  long outages = 0;
  long flagged = 0;
};

}  // namespace

void Experiment::validate() const {
  if (n_nodes < 3) throw ConfigError("experiment needs at least 3 nodes");
  if (mean_gains.rows() != static_cast<std::size_t>(n_nodes))
    throw ConfigError("mean matrix does not match n_nodes");
  if (protocols.empty() && !analytic_lower) throw ConfigError("no protocols requested");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (snr_db.empty()) throw ConfigError("empty SNR grid");
  for (std::size_t i = 1; i < snr_db.size(); ++i)
    if (!(snr_db[i] > snr_db[i - 1])) throw ConfigError("SNR grid must be strictly increasing");
  if (mode == RateMode::FixedRate) {
    if (rates_bits.empty()) throw ConfigError("no rate targets");
    for (double r : rates_bits)
      if (!(r > 0.0)) throw ConfigError("rate targets must be positive");
  } else {
    if (mux_gains.empty()) throw ConfigError("no multiplexing gains");
    for (double r : mux_gains)
      if (!(r > 0.0 && r < 1.0)) throw ConfigError("multiplexing gains must lie in (0,1)");
  }
  for (ProtocolId p : protocols)
    if (p == ProtocolId::CutSetBound && n_nodes > 5)
      throw ConfigError("the cut-set bound protocol supports up to 5 nodes");
}

WilsonInterval wilson95(long successes, long trials) {
  if (trials <= 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {successes == 0 ? 0.0 : std::max(0.0, center - half),
          successes == trials ? 1.0 : std::min(1.0, center + half)};
}

std::vector<OutageCurve> run_experiment(const Experiment& exp) {
  exp.validate();
  const int workers = resolve_workers(exp.workers);
  const int n_points = static_cast<int>(exp.snr_db.size());
  const int n_targets = static_cast<int>(exp.mode == RateMode::FixedRate ? exp.rates_bits.size()
                                                                         : exp.mux_gains.size());
  const int n_protocols = static_cast<int>(exp.protocols.size());
  const long trials = exp.trials;

  std::vector<double> snr_lin(n_points);
  for (int p = 0; p < n_points; ++p) snr_lin[p] = db_to_linear(exp.snr_db[p]);
  // rate_nats[target][point]
  std::vector<std::vector<double>> rate_nats(n_targets, std::vector<double>(n_points));
  for (int t = 0; t < n_targets; ++t)
    for (int p = 0; p < n_points; ++p)
      rate_nats[t][p] = exp.mode == RateMode::FixedRate
                            ? bits_to_nats(exp.rates_bits[t])
                            : exp.mux_gains[t] * std::log(snr_lin[p]);

  bool want_maxmin = false, want_gls = false, want_fo = false, want_bound = false;
  for (ProtocolId p : exp.protocols) {
    want_maxmin |= p == ProtocolId::MaxMinSel;
    want_gls |= p == ProtocolId::Gls;
    want_fo |= p == ProtocolId::Fo;
    want_bound |= p == ProtocolId::CutSetBound;
  }
  const bool need_gls = want_gls || want_fo || want_bound;

  // Atomic tallies: integer sums commute, so the result is independent of
  // how chunks land on threads.
  const int n_cells = n_targets * n_points;
  std::vector<std::atomic<long>> outage_cnt(static_cast<std::size_t>(n_protocols) * n_cells);
  std::vector<std::atomic<long>> flagged_cnt(static_cast<std::size_t>(n_protocols) * n_cells);
  for (auto& a : outage_cnt) a.store(0);
  for (auto& a : flagged_cnt) a.store(0);

  const long chunk_size = 512;
  const long total = static_cast<long>(n_points) * trials;
  const long n_chunks = (total + chunk_size - 1) / chunk_size;

  auto body = [&](long chunk) {
    std::vector<TrialCounts> local(static_cast<std::size_t>(n_protocols) * n_cells);
    const long begin = chunk * chunk_size;
    const long end = std::min(total, begin + chunk_size);
    for (long item = begin; item < end; ++item) {
      const int point = static_cast<int>(item / trials);
      SubstreamRng rng(exp.seed, static_cast<std::uint64_t>(item));
      NetworkInstance net;
      net.n_nodes = exp.n_nodes;
      net.mean_gains = exp.mean_gains;
      net.gains = sample_gains(exp.mean_gains, rng);
      net.snr = snr_lin[point];

      const double direct_rate = capacity(net.gains(0, exp.n_nodes - 1) * net.snr);
      double maxmin_rate = 0.0, gls_rate = 0.0;
      if (want_maxmin) maxmin_rate = max_min_selection(net).rate;
      if (need_gls) gls_rate = gls(net).rate;
      const double screen = (want_fo || want_bound) ? fo_rate_upper_screen(net) : 0.0;

      for (int t = 0; t < n_targets; ++t) {
        const double rn = rate_nats[t][point];
        const int cell = t * n_points + point;
        int fo_state = -1;  // -1 unknown, 0 no outage, 1 outage, 2 flagged
        for (int pi = 0; pi < n_protocols; ++pi) {
          const ProtocolId proto = exp.protocols[pi];
          bool outage = false, flagged = false;
          switch (proto) {
            case ProtocolId::Direct:
              outage = direct_rate < rn;
              break;
            case ProtocolId::MaxMinSel:
              outage = maxmin_rate < rn;
              break;
            case ProtocolId::Gls:
              outage = gls_rate < rn;
              break;
            case ProtocolId::Fo: {
              if (gls_rate >= rn) {
                fo_state = 0;
              } else if (screen < rn) {
                fo_state = 1;
              } else {
                try {
                  fo_state = fo_achieves(FoProblem{net, false, std::nullopt}, rn) ? 0 : 1;
                } catch (const SolverError&) {
                  fo_state = 2;
                }
              }
              outage = fo_state == 1;
              flagged = fo_state == 2;
              break;
            }
            case ProtocolId::CutSetBound: {
              if (fo_state == 0 || gls_rate >= rn) {
                outage = false;
              } else if (screen < rn) {
                outage = true;
              } else {
                try {
                  outage = !bound_achieves(net, rn);
                } catch (const SolverError&) {
                  flagged = true;
                }
              }
              break;
            }
          }
          if (flagged)
            ++local[pi * n_cells + cell].flagged;
          else if (outage)
            ++local[pi * n_cells + cell].outages;
        }
      }
    }
    for (std::size_t i = 0; i < local.size(); ++i) {
      if (local[i].outages) outage_cnt[i].fetch_add(local[i].outages);
      if (local[i].flagged) flagged_cnt[i].fetch_add(local[i].flagged);
    }
  };
  run_chunks(n_chunks, workers, body);

  std::vector<std::vector<TrialCounts>> merged(n_protocols, std::vector<TrialCounts>(n_cells));
  for (int pi = 0; pi < n_protocols; ++pi)
    for (int c = 0; c < n_cells; ++c) {
      merged[pi][c].outages = outage_cnt[pi * n_cells + c].load();
      merged[pi][c].flagged = flagged_cnt[pi * n_cells + c].load();
    }

  long flagged_total = 0;
  for (int pi = 0; pi < n_protocols; ++pi)
    for (int c = 0; c < n_cells; ++c) flagged_total += merged[pi][c].flagged;
  const double flagged_frac =
      static_cast<double>(flagged_total) /
      static_cast<double>(std::max<long>(1, total * std::max(1, n_protocols)));
  if (flagged_frac > exp.max_flagged_fraction)
    throw SolverBudgetError("flagged trial fraction " + std::to_string(flagged_frac) +
                            " exceeds the budget");

  std::vector<OutageCurve> curves;
  for (int t = 0; t < n_targets; ++t) {
    for (int pi = 0; pi < n_protocols; ++pi) {
      OutageCurve curve;
      curve.protocol = protocol_csv_id(exp.protocols[pi]);
      if (exp.mode == RateMode::FixedRate)
        curve.rate_bits = exp.rates_bits[t];
      else
        curve.mux_r = exp.mux_gains[t];
      for (int p = 0; p < n_points; ++p) {
        const auto& cnt = merged[pi][t * n_points + p];
        OutagePoint pt;
        pt.snr_db = exp.snr_db[p];
        pt.rate_bits = nats_to_bits(rate_nats[t][p]);
        pt.trials = trials - cnt.flagged;
        pt.outages = cnt.outages;
        pt.flagged = cnt.flagged;
        pt.p_hat = pt.trials > 0 ? static_cast<double>(pt.outages) / pt.trials : 0.0;
        const auto ci = wilson95(pt.outages, pt.trials);
        pt.ci_lo = ci.lo;
        pt.ci_hi = ci.hi;
        curve.points.push_back(pt);
      }
      curves.push_back(std::move(curve));
    }
    if (exp.analytic_lower) {
      OutageCurve curve;
      curve.protocol = "ma-cut-lb";
      if (exp.mode == RateMode::FixedRate)
        curve.rate_bits = exp.rates_bits[t];
      else
        curve.mux_r = exp.mux_gains[t];
      std::vector<double> dest_means;
      for (int i = 0; i + 1 < exp.n_nodes; ++i)
        dest_means.push_back(exp.mean_gains(i, exp.n_nodes - 1));
      for (int p = 0; p < n_points; ++p) {
        const auto lb = ma_cut_outage_lower_fixed(dest_means, rate_nats[t][p], snr_lin[p]);
        OutagePoint pt;
        pt.snr_db = exp.snr_db[p];
        pt.rate_bits = nats_to_bits(rate_nats[t][p]);
        pt.p_hat = lb.value;
        pt.ci_lo = lb.value;
        pt.ci_hi = lb.value;
        curve.points.push_back(pt);
      }
      curves.push_back(std::move(curve));
    }
  }
  return curves;
}

double estimate_dmt_slope(const OutageCurve& curve, double snr_lo_db, double snr_hi_db) {
  std::vector<double> xs, ys;
  for (const auto& pt : curve.points) {
    if (pt.snr_db < snr_lo_db - 1e-9 || pt.snr_db > snr_hi_db + 1e-9) continue;
    if (!(pt.p_hat > 0.0)) continue;
    xs.push_back(pt.snr_db / 10.0);  // log10 of linear SNR
    ys.push_back(-std::log10(pt.p_hat));
  }
  if (xs.size() < 3)
    throw std::runtime_error("estimate_dmt_slope: fewer than 3 nonzero points in the window");
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

std::optional<double> snr_db_at_outage(const OutageCurve& curve, double p_target) {
  const auto& pts = curve.points;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i].p_hat, b = pts[i + 1].p_hat;
    if (!(a > 0.0) || !(b > 0.0)) continue;
    if ((a >= p_target && b <= p_target) || (a <= p_target && b >= p_target)) {
      if (a == b) return pts[i].snr_db;
      const double la = std::log10(a), lb = std::log10(b), lt = std::log10(p_target);
      const double frac = (lt - la) / (lb - la);
      return pts[i].snr_db + frac * (pts[i + 1].snr_db - pts[i].snr_db);
    }
  }
  return std::nullopt;
}

std::map<ProtocolId, TailPoint> estimate_outage_tail(int n_nodes, const Matrix& means,
                                                     const std::vector<ProtocolId>& protocols,
                                                     double rate_nats, double snr, long samples,
                                                     std::uint64_t seed, int workers) {
  if (n_nodes < 3) throw ConfigError("estimate_outage_tail: need at least 3 nodes");
  if (samples < 1) throw ConfigError("estimate_outage_tail: need at least one sample");

  const int dest = n_nodes - 1;
  const double c_thresh = std::expm1(rate_nats) / snr;  // direct outage <=> Z_SD < c
  const double mean_sd = means(0, dest);
  const double trunc_mass = -std::expm1(-c_thresh / mean_sd);
  const double kappa = std::exp(2.0 * rate_nats);  // failure gains live below kappa/S

  bool want_gls = false, want_fo = false, want_maxmin = false, want_bound = false;
  for (ProtocolId p : protocols) {
    want_gls |= p == ProtocolId::Gls;
    want_fo |= p == ProtocolId::Fo;
    want_maxmin |= p == ProtocolId::MaxMinSel;
    want_bound |= p == ProtocolId::CutSetBound;
  }
  const bool need_gls = want_gls || want_fo || want_bound;

  struct Sums {
    double w = 0.0, w2 = 0.0;
  };
  const int n_proto = static_cast<int>(protocols.size());
  const long chunk_size = 1024;
  const long n_chunks = (samples + chunk_size - 1) / chunk_size;
  std::vector<std::vector<Sums>> chunk_sums(n_chunks, std::vector<Sums>(n_proto));

  auto body = [&](long chunk) {
    const long begin = chunk * chunk_size;
    const long end = std::min(samples, begin + chunk_size);
    auto& out = chunk_sums[chunk];
    for (long i = begin; i < end; ++i) {
      SubstreamRng rng(seed, static_cast<std::uint64_t>(i));
      NetworkInstance net;
      net.n_nodes = n_nodes;
      net.mean_gains = means;
      net.gains = Matrix(n_nodes, n_nodes, 0.0);
      net.snr = snr;

      // Z_SD from the exponential truncated to [0, c).
      const double u0 = rng.next_unit();
      net.gains(0, dest) = -mean_sd * std::log1p(-u0 * trunc_mass);

      // Per relay: two-sided tilt mixture over (source-relay, relay-dest).
      double weight = 1.0;
      for (int k = 1; k <= n_nodes - 2; ++k) {
        const double mu_u = means(0, k), mu_v = means(k, dest);
        const double bu = std::min(mu_u, kappa / snr), bv = std::min(mu_v, kappa / snr);
        const bool tilt_u = rng.next_u64() & 1u;
        const double zu = rng.next_exponential(tilt_u ? bu : mu_u);
        const double zv = rng.next_exponential(tilt_u ? mu_v : bv);
        const double ru = (mu_u / bu) * std::exp(-zu * (1.0 / bu - 1.0 / mu_u));
        const double rv = (mu_v / bv) * std::exp(-zv * (1.0 / bv - 1.0 / mu_v));
        weight /= 0.5 * (ru + rv);
        net.gains(0, k) = zu;
        net.gains(k, dest) = zv;
      }
      for (int a = 1; a <= n_nodes - 2; ++a)
        for (int b = a + 1; b <= n_nodes - 2; ++b) {
          net.gains(a, b) = rng.next_exponential(means(a, b));
          net.gains(b, a) = rng.next_exponential(means(b, a));
        }

      double gls_rate = 0.0, maxmin_rate = 0.0;
      if (need_gls) gls_rate = gls(net).rate;
      if (want_maxmin) maxmin_rate = max_min_selection(net).rate;
      int fo_state = -1;
      for (int pi = 0; pi < n_proto; ++pi) {
        bool outage = false;
        switch (protocols[pi]) {
          case ProtocolId::Direct:
            // Certain under the conditioning and independent of the tilted
            // gains, whose weight integrates out to one exactly.
            out[pi].w += 1.0;
            out[pi].w2 += 1.0;
            continue;
          case ProtocolId::MaxMinSel:
            outage = maxmin_rate < rate_nats;
            break;
          case ProtocolId::Gls:
            outage = gls_rate < rate_nats;
            break;
          case ProtocolId::Fo:
            if (gls_rate >= rate_nats)
              fo_state = 0;
            else if (fo_rate_upper_screen(net) < rate_nats)
              fo_state = 1;
            else
              fo_state = fo_achieves(FoProblem{net, false, std::nullopt}, rate_nats) ? 0 : 1;
            outage = fo_state == 1;
            break;
          case ProtocolId::CutSetBound:
            if (fo_state == 0 || gls_rate >= rate_nats)
              outage = false;
            else if (fo_rate_upper_screen(net) < rate_nats)
              outage = true;
            else
              outage = !bound_achieves(net, rate_nats);
            break;
        }
        if (outage) {
          out[pi].w += weight;
          out[pi].w2 += weight * weight;
        }
      }
    }
  };
  run_chunks(n_chunks, resolve_workers(workers), body);

  std::map<ProtocolId, TailPoint> result;
  for (int pi = 0; pi < n_proto; ++pi) {
    double w = 0.0, w2 = 0.0;
    for (long c = 0; c < n_chunks; ++c) {
      w += chunk_sums[c][pi].w;
      w2 += chunk_sums[c][pi].w2;
    }
    const double n = static_cast<double>(samples);
    const double mean = w / n;
    const double var = std::max(0.0, w2 / n - mean * mean) / n;
    TailPoint tp;
    tp.p_hat = trunc_mass * mean;
    tp.std_err = trunc_mass * std::sqrt(var);
    tp.samples = samples;
    result[protocols[pi]] = tp;
  }
  return result;
}

}  // namespace relay
