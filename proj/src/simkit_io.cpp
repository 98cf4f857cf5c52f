#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "relay/simkit.hpp"

namespace relay {

Experiment experiment_from_json(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
  Experiment exp;
  exp.mean_gains = means_from_config_json(json_text, &exp.n_nodes);

  if (!doc.contains("protocols") || !doc["protocols"].is_array())
    throw ConfigError("experiment config needs a protocols array");
  for (const auto& p : doc["protocols"]) {
    const std::string id = p.get<std::string>();
    if (id == "ma-cut-lb")
      exp.analytic_lower = true;
    else
      exp.protocols.push_back(protocol_from_csv_id(id));
  }

  if (doc.contains("multiplexing_r")) {
    exp.mode = RateMode::Multiplexing;
    if (doc["multiplexing_r"].is_array())
      exp.mux_gains = doc["multiplexing_r"].get<std::vector<double>>();
    else
      exp.mux_gains = {doc["multiplexing_r"].get<double>()};
  } else {
    if (!doc.contains("rates_bits")) throw ConfigError("experiment config needs rates_bits");
    if (doc["rates_bits"].is_array())
      exp.rates_bits = doc["rates_bits"].get<std::vector<double>>();
    else
      exp.rates_bits = {doc["rates_bits"].get<double>()};
  }

  if (!doc.contains("snr_db")) throw ConfigError("experiment config needs snr_db");
  const auto& grid = doc["snr_db"];
  if (grid.is_array()) {
    exp.snr_db = grid.get<std::vector<double>>();
  } else if (grid.is_object()) {
    const double start = grid.at("start").get<double>();
    const double stop = grid.at("stop").get<double>();
    const double step = grid.at("step").get<double>();
    if (!(step > 0.0)) throw ConfigError("snr_db.step must be positive");
    for (double s = start; s <= stop + 1e-9; s += step) exp.snr_db.push_back(s);
  } else {
    throw ConfigError("snr_db must be an array or {start, stop, step}");
  }

  if (doc.contains("trials")) exp.trials = doc["trials"].get<long>();
  if (doc.contains("seed")) exp.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("workers")) exp.workers = doc["workers"].get<int>();
  if (doc.contains("max_flagged_fraction"))
    exp.max_flagged_fraction = doc["max_flagged_fraction"].get<double>();
  exp.validate();
  return exp;
}

Experiment experiment_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return experiment_from_json(ss.str());
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void emit_csv(const std::vector<OutageCurve>& curves, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "protocol,snr_db,rate_bits,trials,outages,p_hat,ci_lo,ci_hi\n";
  for (const auto& curve : curves)
    for (const auto& pt : curve.points)
      out << curve.protocol << ',' << fmt_double(pt.snr_db) << ',' << fmt_double(pt.rate_bits)
          << ',' << pt.trials << ',' << pt.outages << ',' << fmt_double(pt.p_hat) << ','
          << fmt_double(pt.ci_lo) << ',' << fmt_double(pt.ci_hi) << '\n';
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

std::vector<OutageCurve> parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("'" + path + "' is empty");
  if (line.rfind("protocol,snr_db,rate_bits", 0) != 0)
    throw ConfigError("'" + path + "' missing the expected CSV header");

  std::vector<OutageCurve> curves;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8) throw ConfigError("malformed CSV row in '" + path + "'");
    OutagePoint pt;
    pt.snr_db = std::stod(fields[1]);
    pt.rate_bits = std::stod(fields[2]);
    pt.trials = std::stol(fields[3]);
    pt.outages = std::stol(fields[4]);
    pt.p_hat = std::stod(fields[5]);
    pt.ci_lo = std::stod(fields[6]);
    pt.ci_hi = std::stod(fields[7]);

    // New curve on protocol change, rate-target change, or SNR reset.
    const bool fresh = curves.empty() || curves.back().protocol != fields[0] ||
                       (!curves.back().points.empty() &&
                        (pt.snr_db <= curves.back().points.back().snr_db ||
                         std::abs(pt.rate_bits - curves.back().rate_bits) > 1e-9));
    if (fresh) {
      OutageCurve c;
      c.protocol = fields[0];
      c.rate_bits = pt.rate_bits;
      curves.push_back(std::move(c));
    }
    curves.back().points.push_back(pt);
  }
  return curves;
}

std::string gnuplot_script(const std::vector<OutageCurve>& curves) {
  std::ostringstream out;
  out << "set logscale y\n"
      << "set xlabel 'SNR (dB)'\n"
      << "set ylabel 'outage probability'\n"
      << "set grid\n"
      << "set key bottom left\n";
  std::vector<std::string> names;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    std::ostringstream name;
    name << "curve_" << i;
    names.push_back(name.str());
    out << '$' << name.str() << " << EOD\n";
    for (const auto& pt : curves[i].points)
      if (pt.p_hat > 0.0) out << pt.snr_db << ' ' << pt.p_hat << '\n';
    out << "EOD\n";
  }
  out << "plot ";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (i) out << ", \\\n     ";
    out << '$' << names[i] << " using 1:2 with linespoints title '" << curves[i].protocol << " R="
        << curves[i].rate_bits << "'";
  }
  out << '\n';
  return out.str();
}

}  // namespace relay
