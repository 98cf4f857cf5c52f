#include <json.hpp>

#include "relay/netmodel.hpp"

namespace relay {

Matrix means_from_config_json(const std::string& json_text, int* n_nodes_out) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad network config: ") + e.what());
  }
  if (!doc.contains("n_nodes") || !doc["n_nodes"].is_number_integer())
    throw ConfigError("network config needs an integer n_nodes");
  const int n = doc["n_nodes"].get<int>();
  if (n < 3) throw ConfigError("n_nodes must be at least 3");

  Matrix means;
  const auto& m = doc.contains("means") ? doc["means"] : nlohmann::json("uniform");
  if (m.is_string()) {
    means = means_from_preset(m.get<std::string>(), n);
  } else if (m.is_array()) {
    if (static_cast<int>(m.size()) != n) throw ConfigError("mean matrix must be n_nodes x n_nodes");
    means = Matrix(n, n, 0.0);
    for (int i = 0; i < n; ++i) {
      if (!m[i].is_array() || static_cast<int>(m[i].size()) != n)
        throw ConfigError("mean matrix must be n_nodes x n_nodes");
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        if (!m[i][j].is_number()) throw ConfigError("mean matrix entries must be numbers");
        const double v = m[i][j].get<double>();
        if (!(v > 0.0)) throw ConfigError("off-diagonal mean gains must be positive");
        means(i, j) = v;
      }
    }
  } else {
    throw ConfigError("means must be a preset name or a matrix");
  }
  if (n_nodes_out) *n_nodes_out = n;
  return means;
}

}  // namespace relay
