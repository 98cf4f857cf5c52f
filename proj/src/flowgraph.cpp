#include "relay/flowgraph.hpp"

#include <algorithm>
#include <cmath>

#include "relay/netmodel.hpp"

namespace relay {

std::vector<std::pair<int, int>> slot_links(const SlotDescriptor& slot) {
  std::vector<std::pair<int, int>> out;
  out.reserve(slot.peers.size());
  for (int p : slot.peers) {
    if (slot.kind == SlotKind::Broadcast)
      out.emplace_back(slot.hub, p);
    else
      out.emplace_back(p, slot.hub);
  }
  return out;
}

double SlotSchedule::total_length() const {
  double t = 0.0;
  for (const auto& s : slots) t += s.length;
  return t;
}

SlotSchedule canonical_schedule(int n_nodes) {
  if (n_nodes < 3) throw ConfigError("schedule needs at least 3 nodes");
  const int dest = n_nodes - 1;
  SlotSchedule sched;
  sched.slots.reserve(2 * n_nodes - 2);

  SlotDescriptor src_bc;
  src_bc.kind = SlotKind::Broadcast;
  src_bc.hub = 0;
  for (int j = 1; j < n_nodes; ++j) src_bc.peers.push_back(j);
  sched.slots.push_back(std::move(src_bc));

  for (int r = 1; r <= n_nodes - 2; ++r) {
    SlotDescriptor ma;  // relay r receives from every node but the destination
    ma.kind = SlotKind::MultipleAccess;
    ma.hub = r;
    for (int j = 0; j < dest; ++j)
      if (j != r) ma.peers.push_back(j);
    sched.slots.push_back(std::move(ma));

    SlotDescriptor bc;  // relay r transmits to every node but the source
    bc.kind = SlotKind::Broadcast;
    bc.hub = r;
    for (int j = 1; j < n_nodes; ++j)
      if (j != r) bc.peers.push_back(j);
    sched.slots.push_back(std::move(bc));
  }

  SlotDescriptor dst_ma;
  dst_ma.kind = SlotKind::MultipleAccess;
  dst_ma.hub = dest;
  for (int j = 0; j < dest; ++j) dst_ma.peers.push_back(j);
  sched.slots.push_back(std::move(dst_ma));
  return sched;
}

FlowAllocation::FlowAllocation(SlotSchedule schedule) : schedule_(std::move(schedule)) {
  int max_node = 0;
  links_.reserve(schedule_.slots.size());
  flows_.reserve(schedule_.slots.size());
  for (const auto& slot : schedule_.slots) {
    if (slot.peers.empty()) throw ContractViolation("slot has no peers");
    for (int p : slot.peers) {
      if (p == slot.hub) throw ContractViolation("slot hub listed among its peers");
      max_node = std::max(max_node, p);
    }
    max_node = std::max(max_node, slot.hub);
    links_.push_back(slot_links(slot));
    flows_.emplace_back(slot.peers.size(), 0.0);
  }
  n_nodes_ = max_node + 1;
}

int FlowAllocation::link_index_or_throw(int slot, int from, int to) const {
  const auto& lk = links_[slot];
  for (std::size_t i = 0; i < lk.size(); ++i)
    if (lk[i].first == from && lk[i].second == to) return static_cast<int>(i);
  throw ContractViolation("link does not belong to this slot's star");
}

double FlowAllocation::flow(int slot, int from, int to) const {
  return flows_[slot][link_index_or_throw(slot, from, to)];
}

void FlowAllocation::set_flow(int slot, int link_index, double v) {
  if (v < 0.0) throw ContractViolation("flows must be nonnegative");
  flows_[slot][link_index] = v;
}

void FlowAllocation::set_flow(int slot, int from, int to, double v) {
  set_flow(slot, link_index_or_throw(slot, from, to), v);
}

double FlowAllocation::link_total(int from, int to) const {
  double x = 0.0;
  for (int s = 0; s < slot_count(); ++s) {
    const auto& lk = links_[s];
    for (std::size_t i = 0; i < lk.size(); ++i)
      if (lk[i].first == from && lk[i].second == to) x += flows_[s][i];
  }
  return x;
}

std::vector<Cut> enumerate_cuts(int n_nodes) {
  if (n_nodes < 3) throw ConfigError("cut enumeration needs at least 3 nodes");
  const int relays = n_nodes - 2;
  std::vector<Cut> cuts;
  cuts.reserve(std::size_t{1} << relays);
  for (std::uint32_t subset = 0; subset < (1u << relays); ++subset)
    cuts.push_back(Cut{1u | (subset << 1)});
  return cuts;
}

Cut source_cut(int) { return Cut{1u}; }

Cut destination_cut(int n_nodes) {
  return Cut{static_cast<std::uint32_t>((1u << (n_nodes - 1)) - 1u)};
}

double cut_flow(const Cut& cut, const FlowAllocation& alloc) {
  double total = 0.0;
  for (int s = 0; s < alloc.slot_count(); ++s) {
    const auto& lk = alloc.links(s);
    for (std::size_t i = 0; i < lk.size(); ++i)
      if (cut.contains(lk[i].first) && !cut.contains(lk[i].second))
        total += alloc.flow(s, static_cast<int>(i));
  }
  return total;
}

std::vector<double> conservation_residuals(const FlowAllocation& alloc) {
  const int n = alloc.n_nodes();
  std::vector<double> net(n, 0.0);  // out - in per node
  for (int s = 0; s < alloc.slot_count(); ++s) {
    const auto& lk = alloc.links(s);
    for (std::size_t i = 0; i < lk.size(); ++i) {
      const double x = alloc.flow(s, static_cast<int>(i));
      net[lk[i].first] += x;
      net[lk[i].second] -= x;
    }
  }
  return std::vector<double>(net.begin() + 1, net.end() - 1);
}

double min_cut_value(const FlowAllocation& alloc) {
  double best = std::numeric_limits<double>::infinity();
  for (const Cut& c : enumerate_cuts(alloc.n_nodes())) best = std::min(best, cut_flow(c, alloc));
  return best;
}

double reduced_min_cut(const FlowAllocation& alloc) {
  for (double r : conservation_residuals(alloc))
    if (std::abs(r) > kConservationTol)
      throw ContractViolation("reduced_min_cut called on a non-conserving allocation");
  const int n = alloc.n_nodes();
  return std::min(cut_flow(source_cut(n), alloc), cut_flow(destination_cut(n), alloc));
}

}  // namespace relay
