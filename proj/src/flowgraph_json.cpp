#include <json.hpp>

#include "relay/flowgraph.hpp"

namespace relay {

namespace {

nlohmann::json slot_json(const SlotDescriptor& s) {
  return {{"kind", s.kind == SlotKind::Broadcast ? "BC" : "MA"},
          {"hub", s.hub},
          {"peers", s.peers},
          {"length", s.length}};
}

}  // namespace

std::string schedule_to_json(const SlotSchedule& schedule) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : schedule.slots) arr.push_back(slot_json(s));
  return nlohmann::json{{"slots", arr}}.dump(2);
}

std::string allocation_to_json(const FlowAllocation& alloc) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : alloc.schedule().slots) arr.push_back(slot_json(s));
  nlohmann::json flows = nlohmann::json::object();
  for (int s = 0; s < alloc.slot_count(); ++s) {
    const auto& lk = alloc.links(s);
    for (std::size_t i = 0; i < lk.size(); ++i) {
      const std::string key = std::to_string(s) + ":" + std::to_string(lk[i].first) + "->" +
                              std::to_string(lk[i].second);
      flows[key] = alloc.flow(s, static_cast<int>(i));
    }
  }
  return nlohmann::json{{"slots", arr}, {"flows", flows}}.dump(2);
}

}  // namespace relay
