#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace relay {

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class SlotKind { Broadcast, MultipleAccess };

// One time slot: a star of directed links around the hub. Receivers sit in
// peers for a broadcast slot, transmitters for a multiple-access slot.
struct SlotDescriptor {
  SlotKind kind = SlotKind::Broadcast;
  int hub = 0;
  std::vector<int> peers;
  double length = 0.0;
};

// Directed links (from, to) active in the slot, in peer order.
std::vector<std::pair<int, int>> slot_links(const SlotDescriptor& slot);

struct SlotSchedule {
  std::vector<SlotDescriptor> slots;
  double total_length() const;
};

// Canonical 2N-2 slot order: source broadcast first; then for each relay in
// ascending index order its MA-receive slot followed by its broadcast slot;
// destination MA last. Lengths start at zero (they are decision variables).
SlotSchedule canonical_schedule(int n_nodes);

// Per-slot, per-link nonnegative flows x_AB^i over one unit interval. A flow
// may only be attached to a link of that slot's star.
class FlowAllocation {
 public:
  FlowAllocation() = default;
  explicit FlowAllocation(SlotSchedule schedule);

  const SlotSchedule& schedule() const { return schedule_; }
  int slot_count() const { return static_cast<int>(schedule_.slots.size()); }
  int n_nodes() const { return n_nodes_; }

  const std::vector<std::pair<int, int>>& links(int slot) const { return links_[slot]; }
  double flow(int slot, int link_index) const { return flows_[slot][link_index]; }
  double flow(int slot, int from, int to) const;
  void set_flow(int slot, int link_index, double v);
  void set_flow(int slot, int from, int to, double v);

  // x_AB = sum over slots of x_AB^i.
  double link_total(int from, int to) const;

 private:
  int link_index_or_throw(int slot, int from, int to) const;

  SlotSchedule schedule_;
  int n_nodes_ = 0;
  std::vector<std::vector<std::pair<int, int>>> links_;
  std::vector<std::vector<double>> flows_;
};

// A cut keeps the source on one side and the destination on the other;
// source_side is a bitmask over node indices.
struct Cut {
  std::uint32_t source_side = 1;
  bool contains(int node) const { return (source_side >> node) & 1u; }
};

// All 2^(n-2) cuts, starting with {S} and ending with V \ {D}.
std::vector<Cut> enumerate_cuts(int n_nodes);
Cut source_cut(int n_nodes);
Cut destination_cut(int n_nodes);

double cut_flow(const Cut& cut, const FlowAllocation& alloc);

// Per relay: total outflow minus total inflow over the unit interval.
std::vector<double> conservation_residuals(const FlowAllocation& alloc);

inline constexpr double kConservationTol = 1e-7;

// Minimum of cut_flow over every cut.
double min_cut_value(const FlowAllocation& alloc);

// min{x(C_S), x(C_D)}. Only equal to the true min cut for conserving
// allocations; throws ContractViolation when conservation residuals exceed
// kConservationTol.
double reduced_min_cut(const FlowAllocation& alloc);

// Debug dumps (flow map keyed "i:A->B").
std::string schedule_to_json(const SlotSchedule& schedule);
std::string allocation_to_json(const FlowAllocation& alloc);

}  // namespace relay
