#pragma once

#include <optional>
#include <string>

#include "relay/netmodel.hpp"
#include "relay/three_node.hpp"

namespace relay {

enum class ProtocolId { Fo, Gls, MaxMinSel, Direct, CutSetBound };

// Stable ids used in CSV output: "fo", "gls", "maxmin", "direct", "bound".
std::string protocol_csv_id(ProtocolId id);
ProtocolId protocol_from_csv_id(const std::string& id);

struct ProtocolOutcome {
  ProtocolId protocol = ProtocolId::Direct;
  double rate = 0.0;  // nats
  std::optional<int> chosen_relay;
  std::optional<ThreeNodeResult> three_node;  // GLS detail for the chosen relay
  int scalar_optimizations = 0;               // three-node solves performed
};

ProtocolOutcome direct_transmission(const NetworkInstance& net);

// Opportunistic decode-and-forward baseline: pick the relay with the largest
// min(source-relay, relay-destination) gain, run two equal half slots, and
// fall back to direct transmission when that beats relaying.
ProtocolOutcome max_min_selection(const NetworkInstance& net);

// Generalized-link selection: direct when no relay has a better source link
// than the destination, otherwise the best three-node optimum over the
// candidate set K = {k : Z_SRk > Z_SD}. Ties break to the smallest index.
ProtocolOutcome gls(const NetworkInstance& net);

}  // namespace relay
