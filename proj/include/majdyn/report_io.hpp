// SPDX-License-Identifier: Apache-2.0
//
// Config files (INI) and report output (JSON, CSV).
#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json.hpp"
#include "majdyn/errors.hpp"
#include "majdyn/harness.hpp"

namespace majdyn {

inline nlohmann::json to_json(const ExperimentConfig& c) {
  return {
      {"experiment", experiment_name(c.experiment)},
      {"n", c.params.n},
      {"delta", c.params.delta},
      {"p", c.params.p},
      {"trials", c.trials},
      {"seed", c.master_seed},
      {"threads", c.threads},
      {"tolerances", c.tolerances},
      {"output", c.output_path},
      {"keep_raw", c.keep_raw},
      {"max_steps", c.max_steps},
      {"support_c", c.support_c},
      {"bin_width", c.bin_width},
      {"window", c.window},
      {"lead_bin", c.lead_bin},
      {"min_bin_trials", c.min_bin_trials},
      {"mc_samples", c.mc_samples},
      {"bipartite", c.bipartite},
  };
}

inline nlohmann::json to_json(const ReportRow& r) {
  return {{"name", r.name},           {"empirical", r.empirical}, {"analytic", r.analytic},
          {"abs_error", r.abs_error}, {"std_error", r.std_error}, {"tolerance", r.tolerance},
          {"pass", r.pass}};
}

/// Everything that must be identical across reruns: no runtime, no thread count.
inline nlohmann::json metrics_json(const Report& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) rows.push_back(to_json(row));
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& h : r.histograms) hist.push_back({{"name", h.name}, {"counts", h.counts}});
  return {{"rows", rows}, {"extras", r.extras}, {"histograms", hist}, {"seed_ledger", r.seed_ledger}};
}

inline nlohmann::json to_json(const Report& r) {
  nlohmann::json out = metrics_json(r);
  out["config"] = to_json(r.config);
  out["runtime_ms"] = r.runtime_ms;
  out["all_pass"] = r.all_pass();
  out.erase("histograms");  // written as separate CSV matrices
  return out;
}

namespace detail {

// Present keys must parse; absent keys keep `fallback`.
template <class T>
T read(const boost::property_tree::ptree& pt, const std::string& key, T fallback) {
  return pt.get_child_optional(key) ? pt.get<T>(key) : fallback;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f.precision(17);
  return f;
}

}  // namespace detail

inline std::string rows_csv(const Report& r) {
  std::ostringstream os;
  os.precision(17);
  os << "name,empirical,analytic,abs_error,std_error,tolerance,pass\n";
  for (const auto& row : r.rows)
    os << detail::csv_field(row.name) << ',' << row.empirical << ',' << row.analytic << ',' << row.abs_error << ','
       << row.std_error << ',' << row.tolerance << ',' << (row.pass ? "true" : "false") << '\n';
  return os.str();
}

/// Density matrix: first row holds y bin centres, first column x bin centres.
inline std::string histogram_csv(const Histogram2D& h) {
  std::uint64_t total = 0;
  for (auto c : h.counts) total += c;
  std::ostringstream os;
  os.precision(10);
  os << "x\\y";
  for (std::size_t j = 0; j < h.ny; ++j) os << ',' << h.y0 + (static_cast<double>(j) + 0.5) * h.dy;
  os << '\n';
  const double norm = total == 0 ? 0.0 : 1.0 / (static_cast<double>(total) * h.dx * h.dy);
  for (std::size_t i = 0; i < h.nx; ++i) {
    os << h.x0 + (static_cast<double>(i) + 0.5) * h.dx;
    for (std::size_t j = 0; j < h.ny; ++j) os << ',' << static_cast<double>(h.at(i, j)) * norm;
    os << '\n';
  }
  return os.str();
}

/// Writes <path> (JSON), <stem>.csv (rows) and <stem>_<histogram>.csv.
inline void write_report(const Report& r, const std::filesystem::path& path) {
  {
    auto f = detail::open_out(path);
    f << to_json(r).dump(2) << '\n';
    if (!f) throw IoError("write failed for '" + path.string() + "'");
  }
  auto sibling = [&](const std::string& suffix) {
    auto p = path;
    p.replace_filename(path.stem().string() + suffix);
    return p;
  };
  {
    auto f = detail::open_out(sibling(".csv"));
    f << rows_csv(r);
  }
  for (const auto& h : r.histograms) {
    auto f = detail::open_out(sibling("_" + h.name + ".csv"));
    f << histogram_csv(h);
  }
}

/// Reads an INI file:
///
///   [run]        experiment, trials, seed, threads, output, keep_raw
///   [params]     n, delta, p
///   [campaign]   max_steps, support_c, bin_width, window, lead_bin,
///                min_bin_trials, mc_samples, bipartite
///   [tolerances] row family or full row name = value
///
/// Missing keys keep the experiment's defaults.
inline ExperimentConfig load_config(const std::filesystem::path& path) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(path.string(), pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw IoError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  try {
    if (auto e = pt.get_optional<std::string>("run.experiment")) c = ExperimentConfig::defaults(parse_experiment(*e));
    c.trials = detail::read(pt, "run.trials", c.trials);
    c.master_seed = detail::read(pt, "run.seed", c.master_seed);
    c.threads = detail::read(pt, "run.threads", c.threads);
    c.output_path = detail::read(pt, "run.output", c.output_path);
    c.keep_raw = detail::read(pt, "run.keep_raw", c.keep_raw);
    c.params.n = detail::read(pt, "params.n", c.params.n);
    c.params.delta = detail::read(pt, "params.delta", c.params.delta);
    c.params.p = detail::read(pt, "params.p", c.params.p);
    c.max_steps = detail::read(pt, "campaign.max_steps", c.max_steps);
    c.support_c = detail::read(pt, "campaign.support_c", c.support_c);
    c.bin_width = detail::read(pt, "campaign.bin_width", c.bin_width);
    c.window = detail::read(pt, "campaign.window", c.window);
    c.lead_bin = detail::read(pt, "campaign.lead_bin", c.lead_bin);
    c.min_bin_trials = detail::read(pt, "campaign.min_bin_trials", c.min_bin_trials);
    c.mc_samples = detail::read(pt, "campaign.mc_samples", c.mc_samples);
    c.bipartite = detail::read(pt, "campaign.bipartite", c.bipartite);
    if (auto tol = pt.get_child_optional("tolerances"))
      for (const auto& [key, node] : *tol) c.tolerances[key] = node.get_value<double>();
  } catch (const boost::property_tree::ptree_bad_data& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace majdyn
