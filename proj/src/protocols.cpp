#include "relay/protocols.hpp"

#include <algorithm>

namespace relay {

std::string protocol_csv_id(ProtocolId id) {
  switch (id) {
    case ProtocolId::Fo: return "fo";
    case ProtocolId::Gls: return "gls";
    case ProtocolId::MaxMinSel: return "maxmin";
    case ProtocolId::Direct: return "direct";
    case ProtocolId::CutSetBound: return "bound";
  }
  return "unknown";
}

ProtocolId protocol_from_csv_id(const std::string& id) {
  if (id == "fo") return ProtocolId::Fo;
  if (id == "gls") return ProtocolId::Gls;
  if (id == "maxmin") return ProtocolId::MaxMinSel;
  if (id == "direct") return ProtocolId::Direct;
  if (id == "bound") return ProtocolId::CutSetBound;
  throw ConfigError("unknown protocol id '" + id + "'");
}

ProtocolOutcome direct_transmission(const NetworkInstance& net) {
  ProtocolOutcome out;
  out.protocol = ProtocolId::Direct;
  out.rate = capacity(net.gains(0, net.n_nodes - 1) * net.snr);
  return out;
}

ProtocolOutcome max_min_selection(const NetworkInstance& net) {
  const int n = net.n_nodes;
  const int dest = n - 1;
  ProtocolOutcome out;
  out.protocol = ProtocolId::MaxMinSel;

  int best_relay = 1;
  double best_min = -1.0;
  for (int k = 1; k <= n - 2; ++k) {
    const double m = std::min(net.gains(0, k), net.gains(k, dest));
    if (m > best_min) {
      best_min = m;
      best_relay = k;
    }
  }
  const double s = net.snr;
  const double direct = capacity(net.gains(0, dest) * s);
  const double relayed =
      0.5 * std::min(capacity(net.gains(0, best_relay) * s),
                     capacity((net.gains(0, dest) + net.gains(best_relay, dest)) * s));
  out.chosen_relay = best_relay;
  out.rate = std::max(direct, relayed);
  return out;
}

ProtocolOutcome gls(const NetworkInstance& net) {
  const int n = net.n_nodes;
  const int dest = n - 1;
  const double z_sd = net.gains(0, dest);

  ProtocolOutcome out;
  out.protocol = ProtocolId::Gls;
  out.rate = capacity(z_sd * net.snr);

  // Every X_k over K dominates the direct rate, so when K is nonempty the
  // argmax below is the protocol's selection; |K| = 0 falls back to direct.
  double best = -1.0;
  for (int k = 1; k <= n - 2; ++k) {
    if (!(net.gains(0, k) > z_sd)) continue;  // k outside K
    const ThreeNodeResult r =
        solve_three_node(z_sd, net.gains(0, k), net.gains(k, dest), net.snr);
    ++out.scalar_optimizations;
    if (r.rate > best) {
      best = r.rate;
      out.chosen_relay = k;
      out.three_node = r;
    }
  }
  if (out.chosen_relay) out.rate = std::max(out.rate, best);
  return out;
}

}  // namespace relay
