// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo campaigns comparing simulations with the closed-form
// predictions, and the reports they produce.
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "json.hpp"

#include "majdyn/analytic.hpp"
#include "majdyn/binomial.hpp"
#include "majdyn/degree_models.hpp"
#include "majdyn/dynamics.hpp"
#include "majdyn/enumeration.hpp"
#include "majdyn/errors.hpp"
#include "majdyn/graph.hpp"
#include "majdyn/normal.hpp"
#include "majdyn/rng.hpp"

namespace majdyn {

enum class Experiment {
  kWinProb,
  kTermination,
  kDayOneJoint,
  kDayTwoLaw,
  kCellKolmogorov,
  kModelTransfer,
  kEnumValidation,
  kOracleConvergence,
};

inline constexpr std::array<std::pair<Experiment, std::string_view>, 8> kExperimentNames{{
    {Experiment::kWinProb, "win_prob"},
    {Experiment::kTermination, "termination"},
    {Experiment::kDayOneJoint, "day_one_joint"},
    {Experiment::kDayTwoLaw, "day_two_law"},
    {Experiment::kCellKolmogorov, "cell_kolmogorov"},
    {Experiment::kModelTransfer, "model_transfer"},
    {Experiment::kEnumValidation, "enum_validation"},
    {Experiment::kOracleConvergence, "oracle_convergence"},
}};

inline std::string experiment_name(Experiment e) {
  for (const auto& [k, name] : kExperimentNames)
    if (k == e) return std::string(name);
  return "unknown";
}

inline Experiment parse_experiment(std::string_view name) {
  for (const auto& [k, n] : kExperimentNames)
    if (n == name) return k;
  throw InvalidInput("unknown experiment '" + std::string(name) + "'");
}

struct ExperimentConfig {
  Experiment experiment = Experiment::kWinProb;
  ModelParams params{1000, 1, 0.5};
  long trials = 10000;
  std::uint64_t master_seed = 20261018;
  unsigned threads = 1;
  std::map<std::string, double> tolerances;  ///< overrides, keyed by row family or full row name
  std::string output_path;
  bool keep_raw = false;

  long max_steps = kDefaultMaxSteps;
  double support_c = 4.0;     ///< C in the C sqrt(log n) windows
  double bin_width = 0.5;     ///< day-one histogram bin width in x', y' units
  double window = 6.0;        ///< day-one TV window |x'|, |y'| <= window
  long lead_bin = 10;         ///< day-two lead_1 bin width
  long min_bin_trials = 200;  ///< day-two bins with fewer trials are not compared
  long mc_samples = 20000;    ///< Monte Carlo size for the expectation form
  bool bipartite = true;      ///< model_transfer also runs the bipartite models

  void validate() const {
    params.validate();
    if (trials < 1) throw InvalidParameters("config: trials must be at least 1");
    for (const auto& [name, tol] : tolerances)
      if (!(tol > 0.0)) throw InvalidParameters("config: tolerance '" + name + "' must be positive");
    if (max_steps < 1) throw InvalidParameters("config: max_steps must be at least 1");
    if (!(support_c > 0.0 && bin_width > 0.0 && window > 0.0)) throw InvalidParameters("config: widths must be positive");
    if (lead_bin < 1 || min_bin_trials < 1) throw InvalidParameters("config: bins must be positive");
    if (mc_samples < 1000) throw InvalidParameters("config: mc_samples must be at least 1000");
  }

  /// Override for `name` ("family[label]" falls back to "family"), else `fallback`.
  double tolerance(const std::string& name, double fallback) const {
    if (auto it = tolerances.find(name); it != tolerances.end()) return it->second;
    if (auto cut = name.find('['); cut != std::string::npos)
      if (auto it = tolerances.find(name.substr(0, cut)); it != tolerances.end()) return it->second;
    return fallback;
  }

  /// Sizes used by the acceptance campaigns.
  static ExperimentConfig defaults(Experiment e) {
    ExperimentConfig c;
    c.experiment = e;
    switch (e) {
      case Experiment::kWinProb:
        c.params = {1000, 1, 0.5};
        c.trials = 10000;
        break;
      case Experiment::kTermination:
        c.params = {1000, 1, 0.5};
        c.trials = 2000;
        break;
      case Experiment::kDayOneJoint:
        c.params = {1000, 0, 0.5};
        c.trials = 50000;
        break;
      case Experiment::kDayTwoLaw:
        c.params = {1000, 0, 0.5};
        c.trials = 20000;
        break;
      case Experiment::kCellKolmogorov:
        c.params = {2000, 0, 0.5};
        c.trials = 100;
        break;
      case Experiment::kModelTransfer:
        c.params = {2000, 0, 0.5};
        c.trials = 5000;
        break;
      case Experiment::kEnumValidation:
        c.params = {10, 0, 0.5};
        c.trials = 20;
        break;
      case Experiment::kOracleConvergence:
        c.params = {1000, 0, 0.5};
        c.trials = 1;
        break;
    }
    return c;
  }
};

struct ReportRow {
  std::string name;
  double empirical = 0.0;
  double analytic = 0.0;
  double abs_error = 0.0;
  double std_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Integer counts on a regular grid; densities are derived when written.
struct Histogram2D {
  std::string name;
  double x0 = 0.0, dx = 1.0, y0 = 0.0, dy = 1.0;
  std::size_t nx = 0, ny = 0;
  std::vector<std::uint64_t> counts;  ///< row-major, x index first

  std::uint64_t& at(std::size_t i, std::size_t j) { return counts[i * ny + j]; }
  std::uint64_t at(std::size_t i, std::size_t j) const { return counts[i * ny + j]; }
};

struct Report {
  ExperimentConfig config;
  std::vector<ReportRow> rows;
  double runtime_ms = 0.0;
  nlohmann::json seed_ledger;
  nlohmann::json extras = nlohmann::json::object();
  std::vector<Histogram2D> histograms;

  void add_row(std::string name, double empirical, double analytic, double std_error, double fallback_tol) {
    ReportRow r;
    r.tolerance = config.tolerance(name, fallback_tol);
    r.name = std::move(name);
    r.empirical = empirical;
    r.analytic = analytic;
    r.abs_error = std::abs(empirical - analytic);
    r.std_error = std_error;
    r.pass = r.abs_error <= r.tolerance;
    rows.push_back(std::move(r));
  }

  const ReportRow* find(std::string_view name) const {
    for (const auto& r : rows)
      if (r.name == name) return &r;
    return nullptr;
  }

  /// Rows whose name starts with `prefix`.
  std::vector<const ReportRow*> family(std::string_view prefix) const {
    std::vector<const ReportRow*> out;
    for (const auto& r : rows)
      if (std::string_view(r.name).substr(0, prefix.size()) == prefix) out.push_back(&r);
    return out;
  }

  bool all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
  }
};

// ---- parallel trials ---------------------------------------------------------

/// Runs f(0) .. f(count - 1) on `threads` workers. Results land in a slot per
/// index, so the returned vector does not depend on scheduling.
template <class F>
auto run_indexed(long count, unsigned threads, F&& f) {
  using R = std::invoke_result_t<F&, long>;
  std::vector<R> slots(static_cast<std::size_t>(std::max(0L, count)));
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_lock;
  auto worker = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= count) return;
      try {
        slots[static_cast<std::size_t>(i)] = f(i);
      } catch (...) {
        std::lock_guard lock(error_lock);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  const long want = std::clamp<long>(static_cast<long>(threads), 1, std::max(1L, count));
  std::vector<std::thread> pool;
  for (long t = 1; t < want; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return slots;
}

// ---- small statistics --------------------------------------------------------

namespace detail {

struct Wilson {
  double lo, hi;
};

inline Wilson wilson_interval(double successes, double n, double z = 1.959963984540054) {
  const double phat = successes / n;
  const double z2 = z * z;
  const double centre = (phat + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  return {centre - half, centre + half};
}

// Linear-interpolated quantile of an unsorted sample.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const std::size_t j = std::min(i + 1, v.size() - 1);
  return v[i] + (pos - static_cast<double>(i)) * (v[j] - v[i]);
}

inline double mean_of(const std::vector<double>& v) {
  KahanSum s;
  for (double x : v) s.add(x);
  return s.value() / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  KahanSum s;
  for (double x : v) s.add((x - m) * (x - m));
  return s.value() / static_cast<double>(v.size() - 1);
}

inline std::string label(const std::string& family, const std::string& what) { return family + "[" + what + "]"; }

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

inline nlohmann::json base_ledger(const ExperimentConfig& c) {
  return {{"master_seed", c.master_seed}, {"derivation", std::string(kSeedDerivation)}};
}

// Seeds of independent streams inside one campaign.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream, long index) {
  return derive_seed(derive_seed(master, stream), static_cast<std::uint64_t>(index));
}

}  // namespace detail

// ---- win probability and termination ----------------------------------------

struct TrialOutcome {
  Outcome::Kind kind = Outcome::Kind::kMaxStepsReached;
  long step = 0;
};

inline TrialOutcome simulate_outcome(const ModelParams& params, std::uint64_t seed, long max_steps) {
  const auto g = sample_gnp(params, seed);
  const auto t = run(g, initial_coloring(params), max_steps);
  return {t.outcome.kind, t.outcome.consensus() ? t.outcome.step : t.steps()};
}

namespace detail {

inline std::vector<TrialOutcome> outcomes(const ExperimentConfig& c) {
  return run_indexed(c.trials, c.threads,
                     [&](long i) { return simulate_outcome(c.params, derive_seed(c.master_seed, static_cast<std::uint64_t>(i)), c.max_steps); });
}

inline nlohmann::json outcome_histogram(const std::vector<TrialOutcome>& v) {
  std::map<std::string, long> h;
  for (const auto& o : v) {
    std::string key;
    switch (o.kind) {
      case Outcome::Kind::kRedWins:
        key = "red@" + std::to_string(o.step);
        break;
      case Outcome::Kind::kBlueWins:
        key = "blue@" + std::to_string(o.step);
        break;
      case Outcome::Kind::kCycle:
        key = "cycle";
        break;
      case Outcome::Kind::kMaxStepsReached:
        key = "max_steps";
        break;
    }
    ++h[key];
  }
  return h;
}

}  // namespace detail

inline Report run_win_prob(const ExperimentConfig& c) {
  c.validate();
  Report r;
  r.config = c;
  r.seed_ledger = detail::base_ledger(c);
  const auto v = detail::outcomes(c);
  double wins = 0;
  for (const auto& o : v) wins += o.kind == Outcome::Kind::kRedWins;
  const double t = static_cast<double>(c.trials);
  const double f = wins / t;
  const double target = c.params.p > 0.0 && c.params.p < 1.0 ? win_probability(c.params) : (c.params.delta > 0 ? 1.0 : 0.5);
  r.add_row(detail::label("win_frequency", "delta=" + std::to_string(c.params.delta)), f, target,
            std::sqrt(f * (1.0 - f) / t), 0.02);
  const auto w = detail::wilson_interval(wins, t);
  r.extras["wilson_95"] = {w.lo, w.hi};
  r.extras["termination_histogram"] = detail::outcome_histogram(v);
  r.extras["in_theorem_regime"] = in_theorem_regime(c.params);
  return r;
}

inline Report run_termination(const ExperimentConfig& c) {
  c.validate();
  Report r;
  r.config = c;
  r.seed_ledger = detail::base_ledger(c);
  const auto v = detail::outcomes(c);
  const double t = static_cast<double>(c.trials);
  for (long k : {3L, 4L}) {
    double done = 0;
    for (const auto& o : v)
      done += (o.kind == Outcome::Kind::kRedWins || o.kind == Outcome::Kind::kBlueWins) && o.step <= k;
    const double f = done / t;
    r.add_row(detail::label("consensus_by_step", std::to_string(k)), f, 1.0, std::sqrt(f * (1.0 - f) / t),
              k == 3 ? 0.01 : 0.001);
  }
  r.extras["termination_histogram"] = detail::outcome_histogram(v);
  r.extras["in_theorem_regime"] = in_theorem_regime(c.params);
  return r;
}

// ---- day one -----------------------------------------------------------------

struct DayOneSample {
  long x = 0;  ///< |R0 ∩ R1|
  long y = 0;  ///< |B0 ∩ B1|
};

inline DayOneSample simulate_day_one(const ModelParams& params, std::uint64_t seed) {
  const auto g = sample_gnp(params, seed);
  const auto c0 = initial_coloring(params);
  const auto c1 = step(g, c0);
  DayOneSample s;
  for (std::size_t v = 0; v < c0.size(); ++v) {
    if (c0.opinions[v] != c1.opinions[v]) continue;
    (c0.opinions[v] == Opinion::kRed ? s.x : s.y) += 1;
  }
  return s;
}

inline Report run_day_one_joint(const ExperimentConfig& c) {
  c.validate();
  c.params.validate_open();
  Report r;
  r.config = c;
  r.seed_ledger = detail::base_ledger(c);
  const auto samples = run_indexed(c.trials, c.threads, [&](long i) {
    return simulate_day_one(c.params, derive_seed(c.master_seed, static_cast<std::uint64_t>(i)));
  });
  const auto centre = day_one_centering(c.params);
  const double t = static_cast<double>(c.trials);

  // lattice-aligned bins of `b` integer values covering the window
  const long b = std::max(1L, std::lround(c.bin_width * centre.scale));
  const long x_lo = static_cast<long>(std::ceil(centre.x_center - c.window * centre.scale));
  const long y_lo = static_cast<long>(std::ceil(centre.y_center - c.window * centre.scale));
  const long span = static_cast<long>(std::floor(2.0 * c.window * centre.scale)) + 1;
  const auto nb = static_cast<std::size_t>(span / b);
  Histogram2D h;
  h.name = "day_one_xy";
  h.x0 = centre.x_prime(static_cast<double>(x_lo));
  h.y0 = centre.y_prime(static_cast<double>(y_lo));
  h.dx = h.dy = static_cast<double>(b) / centre.scale;
  h.nx = h.ny = nb;
  h.counts.assign(nb * nb, 0);
  const double tail = c.support_c * std::sqrt(std::log(static_cast<double>(c.params.n)));
  long beyond = 0;
  std::vector<double> xs, ys;
  xs.reserve(samples.size());
  ys.reserve(samples.size());
  for (const auto& s : samples) {
    xs.push_back(static_cast<double>(s.x));
    ys.push_back(static_cast<double>(s.y));
    const long i = s.x - x_lo, j = s.y - y_lo;
    if (i >= 0 && j >= 0 && i / b < static_cast<long>(nb) && j / b < static_cast<long>(nb))
      ++h.at(static_cast<std::size_t>(i / b), static_cast<std::size_t>(j / b));
    const double xp = centre.x_prime(static_cast<double>(s.x)), yp = centre.y_prime(static_cast<double>(s.y));
    if (std::max(std::abs(xp), std::abs(yp)) > tail) ++beyond;
  }
  KahanSum tv;
  std::vector<double> marginal(nb, 0.0);
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      KahanSum mass;
      for (long u = 0; u < b; ++u)
        for (long w = 0; w < b; ++w)
          mass.add(day_one_density(c.params, x_lo + static_cast<long>(i) * b + u, y_lo + static_cast<long>(j) * b + w));
      tv.add(std::abs(static_cast<double>(h.at(i, j)) / t - mass.value()));
    }
  r.add_row("day_one_tv", 0.5 * tv.value(), 0.0, 0.0, 0.05);

  const double mx = detail::mean_of(xs), my = detail::mean_of(ys);
  KahanSum sxy;
  for (std::size_t k = 0; k < xs.size(); ++k) sxy.add((xs[k] - mx) * (ys[k] - my));
  const double vx = detail::sample_variance(xs), vy = detail::sample_variance(ys);
  const double corr = sxy.value() / static_cast<double>(xs.size() - 1) / std::sqrt(vx * vy);
  r.add_row("day_one_correlation", corr, kDayOneCorrelation, (1.0 - corr * corr) / std::sqrt(t), 0.1);

  const double se_x = std::sqrt(vx / t), se_y = std::sqrt(vy / t);
  r.add_row("day_one_mean_z[x]", (mx - centre.x_center) / se_x, 0.0, 1.0, 3.0);
  r.add_row("day_one_mean_z[y]", (my - centre.y_center) / se_y, 0.0, 1.0, 3.0);
  const double bins = static_cast<double>(nb * nb);
  r.add_row("day_one_tail_fraction", static_cast<double>(beyond) / t, 0.0, 0.0,
            10.0 * std::pow(static_cast<double>(c.params.n), -5.0) * bins);
  r.extras["marginal_variance_ratio"] = {vx / (centre.scale * centre.scale) / kDayOneMarginalVariance,
                                         vy / (centre.scale * centre.scale) / kDayOneMarginalVariance};
  r.extras["bin_size"] = b;
  r.extras["tail_band"] = tail;
  r.histograms.push_back(std::move(h));
  if (c.keep_raw) {
    nlohmann::json raw = nlohmann::json::array();
    for (const auto& s : samples) raw.push_back({s.x, s.y});
    r.extras["raw"] = std::move(raw);
  }
  return r;
}

// ---- day two -----------------------------------------------------------------

struct DayTwoSample {
  long lead1 = 0;
  long r2 = 0;     ///< |R2|
  long r0_r2 = 0;  ///< |R0 ∩ R2|
  long b0_r2 = 0;  ///< |B0 ∩ R2|
  bool typical = false;
};

inline DayTwoSample simulate_day_two(const ModelParams& params, std::uint64_t seed, double big_c) {
  const auto g = sample_gnp(params, seed);
  Trajectory t;
  t.colorings.push_back(initial_coloring(params));
  t.colorings.push_back(step(g, t.colorings[0]));
  const auto c2 = step(g, t.colorings[1]);
  DayTwoSample s;
  s.lead1 = t.colorings[1].lead();
  for (std::size_t v = 0; v < c2.size(); ++v) {
    if (c2.opinions[v] != Opinion::kRed) continue;
    ++s.r2;
    (t.colorings[0].opinions[v] == Opinion::kRed ? s.r0_r2 : s.b0_r2) += 1;
  }
  s.typical = typicality_check(g, t, params, big_c, 1.0).all();
  return s;
}

inline Report run_day_two_law(const ExperimentConfig& c) {
  c.validate();
  c.params.validate_open();
  Report r;
  r.config = c;
  r.seed_ledger = detail::base_ledger(c);
  const auto samples = run_indexed(c.trials, c.threads, [&](long i) {
    return simulate_day_two(c.params, derive_seed(c.master_seed, static_cast<std::uint64_t>(i)), c.support_c);
  });
  const double n = static_cast<double>(c.params.n);
  // bin k holds lead_1 in [k w - w/2, k w + w/2)
  auto bin_of = [&](long lead) {
    return static_cast<long>(std::floor((static_cast<double>(lead) + 0.5 * static_cast<double>(c.lead_bin)) /
                                        static_cast<double>(c.lead_bin)));
  };
  std::map<long, std::vector<const DayTwoSample*>> bins;
  long typical = 0;
  for (const auto& s : samples) {
    if (!s.typical) continue;
    ++typical;
    bins[bin_of(s.lead1)].push_back(&s);
  }
  r.extras["typical_fraction"] = static_cast<double>(typical) / static_cast<double>(c.trials);

  const double mean_tol = 5.0 * std::pow(n, 0.85), iqr_tol = 5.0 * std::pow(n, 0.9);
  nlohmann::json table = nlohmann::json::array();
  std::optional<double> prev_mean;
  double worst_drop = 0.0;
  for (const auto& [k, members] : bins) {
    if (static_cast<long>(members.size()) < c.min_bin_trials) continue;
    std::vector<double> sizes, pred;
    for (const auto* s : members) {
      sizes.push_back(static_cast<double>(s->r2));
      pred.push_back(day_two_expectations(c.params, s->lead1).e_r2);
    }
    const long lo = k * c.lead_bin - c.lead_bin / 2;
    const std::string tag = "lead=" + std::to_string(lo) + ".." + std::to_string(lo + c.lead_bin - 1);
    const double m = detail::mean_of(sizes);
    const double se = std::sqrt(detail::sample_variance(sizes) / static_cast<double>(sizes.size()));
    r.add_row(detail::label("day_two_bin_mean", tag), m, detail::mean_of(pred), se, mean_tol);
    const double iqr = detail::quantile(sizes, 0.75) - detail::quantile(sizes, 0.25);
    r.add_row(detail::label("day_two_bin_iqr", tag), iqr, 0.0, 0.0, iqr_tol);
    if (prev_mean) worst_drop = std::max(worst_drop, *prev_mean - m);
    prev_mean = m;
    table.push_back({{"bin", tag}, {"trials", members.size()}, {"mean_r2", m}, {"iqr_r2", iqr}});
  }
  r.add_row("day_two_monotone_drop", worst_drop, 0.0, 0.0, 1e-9);
  r.extras["bins"] = std::move(table);

  // expectation split in the bin around lead_1 = 0
  if (auto it = bins.find(0); it != bins.end()) {
    std::vector<double> fr, fb, pr, pb;
    for (const auto* s : it->second) {
      fr.push_back(static_cast<double>(s->r0_r2) / n);
      fb.push_back(static_cast<double>(s->b0_r2) / n);
      const auto e = day_two_expectations(c.params, s->lead1);
      pr.push_back(e.e_r0_r2 / n);
      pb.push_back(e.e_b0_r2 / n);
    }
    const double k = static_cast<double>(fr.size());
    r.add_row("r0_r2_fraction", detail::mean_of(fr), detail::mean_of(pr), std::sqrt(detail::sample_variance(fr) / k), 0.02);
    r.add_row("b0_r2_fraction", detail::mean_of(fb), detail::mean_of(pb), std::sqrt(detail::sample_variance(fb) / k), 0.02);
    r.extras["zero_bin_trials"] = it->second.size();
  }
  if (c.keep_raw) {
    nlohmann::json raw = nlohmann::json::array();
    for (const auto& s : samples) raw.push_back({s.lead1, s.r2, s.r0_r2, s.b0_r2, s.typical});
    r.extras["raw"] = std::move(raw);
  }
  return r;
}

// ---- day-one cell statistics -------------------------------------------------

struct CellTrial {
  std::array<double, 2> dk{};
  bool support_ok = false;
  double max_abs = 0.0;
};

inline CellTrial simulate_cells(const ModelParams& params, std::uint64_t seed, double big_c) {
  const auto g = sample_gnp(params, seed);
  Trajectory t;
  t.colorings.push_back(initial_coloring(params));
  const auto cs = cell_stats(g, t, 1, params);
  CellTrial out;
  for (double v : cs.normalized) out.max_abs = std::max(out.max_abs, std::abs(v));
  out.support_ok = out.max_abs <= big_c * std::sqrt(std::log(static_cast<double>(params.n)));
  const std::function<double(double)> phi = [](double z) { return normal_cdf(z); };
  for (std::size_t x = 0; x < 2; ++x) {
    std::vector<std::array<double, 2>> pts;
    for (const auto& row : cs.cell_sample(x)) pts.push_back({row[0], row[1]});
    out.dk[x] = pts.empty() ? 1.0 : kolmogorov_distance_2d(pts, phi, phi);
  }
  return out;
}

inline Report run_cell_kolmogorov(const ExperimentConfig& c) {
  c.validate();
  c.params.validate_open();
  Report r;
  r.config = c;
  r.seed_ledger = detail::base_ledger(c);
  const auto trials = run_indexed(c.trials, c.threads, [&](long i) {
    return simulate_cells(c.params, derive_seed(c.master_seed, static_cast<std::uint64_t>(i)), c.support_c);
  });
  const double t = static_cast<double>(c.trials);
  for (std::size_t x = 0; x < 2; ++x) {
    std::vector<double> d;
    for (const auto& tr : trials) d.push_back(tr.dk[x]);
    const std::string tag = "x=" + std::to_string(x);
    // the 0.99 quantile is at most the tolerance iff 99% of trials are within it
    r.add_row(detail::label("cell_dk_q99", tag), detail::quantile(d, 0.99), 0.0, 0.0, 0.05);
    r.add_row(detail::label("cell_dk_median", tag), detail::quantile(d, 0.5), 0.0, 0.0, 0.05);
    r.extras["dk_within_0.05_fraction_" + tag] =
        static_cast<double>(std::count_if(d.begin(), d.end(), [](double v) { return v <= 0.05; })) / t;
    r.extras["dk_max_" + tag] = *std::max_element(d.begin(), d.end());
  }
  double ok = 0, worst = 0;
  for (const auto& tr : trials) {
    ok += tr.support_ok;
    worst = std::max(worst, tr.max_abs);
  }
  r.add_row("cell_support_fraction", ok / t, 1.0, 0.0, 0.01);
  r.extras["support_band"] = c.support_c * std::sqrt(std::log(static_cast<double>(c.params.n)));
  r.extras["max_abs_normalized_degree"] = worst;
  return r;
}

// ---- degree-model transference -----------------------------------------------

inline Report run_model_transfer(const ExperimentConfig& c) {
  c.validate();
  c.params.validate_open();
  Report r;
  r.config = c;
  r.seed_ledger = detail::base_ledger(c);
  r.seed_ledger["streams"] = {{"true", 1}, {"integrated", 2}, {"true_bipartite", 3}, {"integrated_bipartite", 4}};
  const long n = c.params.n;
  const double p = c.params.p;

  struct Pair {
    DegreeSummary truth{};
    DegreeSummary integrated{};
    double attempts = 0;
  };
  auto compare = [&](const std::string& which, const std::vector<Pair>& v) {
    static constexpr std::array<std::string_view, 3> kStats{"sum", "variance", "max"};
    for (std::size_t s = 0; s < kStats.size(); ++s) {
      std::vector<double> a, b;
      for (const auto& pr : v) {
        const auto pick = [&](const DegreeSummary& d) { return s == 0 ? d.sum : (s == 1 ? d.variance : d.max); };
        a.push_back(pick(pr.truth));
        b.push_back(pick(pr.integrated));
      }
      r.add_row(detail::label("transfer_dk", which + "," + std::string(kStats[s])), kolmogorov_distance(a, b), 0.0, 0.0,
                0.03);
    }
    double att = 0;
    for (const auto& pr : v) att += pr.attempts;
    r.extras["mean_attempts_" + which] = att / static_cast<double>(v.size());
  };

  const auto graph = run_indexed(c.trials, c.threads, [&](long i) {
    Pair pr;
    const auto d = sample_true(n, p, detail::stream_seed(c.master_seed, 1, i));
    SamplerStats st;
    const auto e = sample_I(n, p, detail::stream_seed(c.master_seed, 2, i), &st);
    pr.truth = summarize(d.degrees);
    pr.integrated = summarize(e.degrees);
    pr.attempts = static_cast<double>(st.attempts);
    return pr;
  });
  compare("graph", graph);

  if (c.bipartite) {
    const auto bip = run_indexed(c.trials, c.threads, [&](long i) {
      auto joined = [](const BipartiteDegreeSequence& b) {
        std::vector<long> all(b.s);
        all.insert(all.end(), b.t.begin(), b.t.end());
        return all;
      };
      Pair pr;
      const auto d = sample_true_bip(n, n, p, detail::stream_seed(c.master_seed, 3, i));
      SamplerStats st;
      const auto e = sample_I_bip(n, n, p, detail::stream_seed(c.master_seed, 4, i), &st);
      pr.truth = summarize(joined(d));
      pr.integrated = summarize(joined(e));
      pr.attempts = static_cast<double>(st.attempts);
      return pr;
    });
    compare("bipartite", bip);
  }
  return r;
}

// ---- enumeration oracles -----------------------------------------------------

namespace detail {

// Every degree sequence on n labelled vertices with its number of realisations,
// by walking all 2^(n choose 2) graphs.
inline std::map<std::vector<long>, long> brute_force_counts(long n) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::map<std::vector<long>, long> tally;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs.size()); ++mask) {
    std::vector<long> d(static_cast<std::size_t>(n), 0);
    for (std::size_t e = 0; e < pairs.size(); ++e)
      if (mask >> e & 1) {
        ++d[static_cast<std::size_t>(pairs[e].first)];
        ++d[static_cast<std::size_t>(pairs[e].second)];
      }
    ++tally[d];
  }
  return tally;
}

inline std::vector<double> uniform_betas(long n, double width, std::uint64_t seed) {
  Xoshiro256 eng(seed);
  std::vector<double> b(static_cast<std::size_t>(n));
  for (auto& x : b) x = width * (2.0 * eng.uniform() - 1.0);
  return b;
}

}  // namespace detail

inline Report run_enum_validation(const ExperimentConfig& c) {
  c.validate();
  Report r;
  r.config = c;
  r.seed_ledger = detail::base_ledger(c);
  r.seed_ledger["streams"] = {{"mw_suite", 1}, {"cgm_suite", 2}, {"betas", 3}, {"monte_carlo", 4}};

  // exhaustive agreement on n <= 6, including sequences with no realisation
  long mismatches = 0, checked = 0;
  for (long n = 1; n <= 6; ++n) {
    const auto tally = detail::brute_force_counts(n);
    std::vector<long> d(static_cast<std::size_t>(n), 0);
    std::function<void(std::size_t)> walk = [&](std::size_t i) {
      if (i == d.size()) {
        const auto it = tally.find(d);
        const long want = it == tally.end() ? 0 : it->second;
        ++checked;
        if (exact_count_graphs(d) != want) ++mismatches;
        return;
      }
      for (long v = 0; v < n; ++v) {
        d[i] = v;
        walk(i + 1);
      }
    };
    walk(0);
  }
  r.add_row("exact_count_mismatches", static_cast<double>(mismatches), 0.0, 0.0, 0.5);
  r.extras["exact_count_sequences_checked"] = checked;

  // near-regular suites: worst |log(estimate / exact)| against log 2
  const double log2 = std::numbers::ln2;
  {
    double worst = 0;
    long taken = 0;
    for (long i = 0; taken < c.trials; ++i) {
      const auto d = sample_true(10, c.params.p, detail::stream_seed(c.master_seed, 1, i));
      const auto ctx = graph_context(d.degrees);
      if (!(ctx.mu > 0 && ctx.mu < 1) || ctx.gamma2_sq > 0.5 * ctx.mu * (1 - ctx.mu) / 10.0) continue;
      const double exact = exact_count_graphs(d).convert_to<double>();
      worst = std::max(worst, std::abs(mw_log_count(d).log_count - std::log(exact)));
      ++taken;
    }
    r.add_row("mw_log_ratio_worst", worst, 0.0, 0.0, log2);
  }
  {
    double worst = 0;
    long taken = 0;
    for (long i = 0; taken < c.trials; ++i) {
      const auto b = sample_true_bip(5, 5, c.params.p, detail::stream_seed(c.master_seed, 2, i));
      const auto ms = std::minmax_element(b.s.begin(), b.s.end());
      const auto mt = std::minmax_element(b.t.begin(), b.t.end());
      if (*ms.second - *ms.first > 2 || *mt.second - *mt.first > 2 || b.sum_s() < 8 || b.sum_s() > 17) continue;
      const double exact = exact_count_bigraphs(b).convert_to<double>();
      worst = std::max(worst, std::abs(cgm_log_count(b).log_count - std::log(exact)));
      ++taken;
    }
    r.add_row("cgm_log_ratio_worst", worst, 0.0, 0.0, log2);
  }

  // lattice normalisation of the balanced form at n = 5000
  const long big = 5000;
  const double p = 0.5;
  for (EnumCase which : {EnumCase::kGraph, EnumCase::kBipartite}) {
    BalancedDegreeInputs in;
    in.beta = detail::uniform_betas(big, 0.5, detail::stream_seed(c.master_seed, 3, 0));
    in.h = big / 2;
    in.m = big;
    in.alpha = 0.2;
    const double scale = std::sqrt(p * (1 - p) * static_cast<double>(big));
    KahanSum total;
    for (long t = 0; t <= in.h; ++t) {
      in.gamma = (static_cast<double>(t) - p * static_cast<double>(in.h)) / scale;
      total.add(cond_degree_balanced(which, in, big, p).value);
    }
    r.add_row(detail::label("balanced_lattice_sum", which == EnumCase::kGraph ? "graph" : "bipartite"), total.value(),
              1.0, 0.0, 0.03);
  }

  // Monte Carlo expectation form against the bounded form, in standard errors
  const long mid = 3000;
  for (EnumCase which : {EnumCase::kGraph, EnumCase::kBipartite}) {
    BalancedDegreeInputs in;
    in.beta = detail::uniform_betas(mid, 0.6, detail::stream_seed(c.master_seed, 3, 1));
    in.h = mid / 2;
    in.m = mid;
    in.alpha = 0.4;
    const double scale = std::sqrt(p * (1 - p) * static_cast<double>(mid));
    double worst = 0;
    long k = 0;
    for (double g : {-1.0, 0.0, 0.7}) {
      const long t = std::lround(p * static_cast<double>(in.h) + g * scale);
      const auto mc = expectation_form(which, in, mid, p, t, c.mc_samples, detail::stream_seed(c.master_seed, 4, k++));
      const auto an = cond_degree_bounded(which, in, mid, p, t);
      worst = std::max(worst, std::abs(mc.value - an.value) / mc.std_error);
    }
    r.add_row(detail::label("expectation_vs_bounded_z", which == EnumCase::kGraph ? "graph" : "bipartite"), worst, 0.0,
              1.0, 3.0);
  }

  // slice moment and binomial ratio spot checks
  {
    const auto a = detail::uniform_betas(20, 0.3, detail::stream_seed(c.master_seed, 3, 2));
    const double gap = std::abs(std::log(slice_exp_moment(a, 10, SliceMode::kExact)) -
                                std::log(slice_exp_moment(a, 10, SliceMode::kApprox)));
    r.add_row("slice_log_gap", gap, 0.0, 0.0, 0.05);
    const auto br = binomial_ratio_approx(EnumCase::kBipartite, 2000, 2000, 2000000, 1000, 0.5);
    r.add_row("binomial_ratio_gap", br.exact_log_ratio, br.approx_log_ratio, 0.0, 10.0 * std::pow(2000.0, -1.0 / 6.0));
  }
  return r;
}

// ---- exact-oracle convergence -----------------------------------------------

inline constexpr std::array<long, 3> kOracleGrid{1000, 4000, 16000};

inline Report run_oracle_convergence(const ExperimentConfig& c) {
  c.validate();
  Report r;
  r.config = c;
  r.seed_ledger = detail::base_ledger(c);
  const double p = c.params.p;
  detail::require_open_p(p);
  // below this the oracle cannot resolve the error, so it counts as zero
  constexpr double kFloor = 1e-12;

  // chop probability: per n, the worst err * n^(3/4) with a = sqrt(p(1-p) log n) / 2.
  // Monotonicity needs alpha and beta held fixed, so each grid value of a is
  // also run across the whole grid.
  const std::array<long, 5> taus{-3, -1, 0, 1, 3};
  auto chop_error = [&](long n, long tau, double alpha, double beta) {
    const double nd = static_cast<double>(n);
    return std::abs(exact_ge_probability(n, tau, p + alpha / nd, p + beta / nd) -
                    chop_probability_approx(nd, tau, p, alpha, beta));
  };
  auto half_width = [&](long n) { return std::sqrt(p * (1 - p) * std::log(static_cast<double>(n))) / 2.0; };
  nlohmann::json table = nlohmann::json::array();
  for (long n : kOracleGrid) {
    const double a = half_width(n);
    double worst = 0;
    for (long tau : taus)
      for (int sa : {-1, 0, 1})
        for (int sb : {-1, 0, 1}) {
          const double err = chop_error(n, tau, sa * a, sb * a);
          worst = std::max(worst, err * std::pow(static_cast<double>(n), 0.75));
          table.push_back({{"n", n}, {"tau", tau}, {"alpha", sa * a}, {"beta", sb * a}, {"error", err}});
        }
    r.add_row(detail::label("chop_probability_scaled_error", "n=" + std::to_string(n)), worst, 0.0, 0.0, 5.0);
  }
  long not_decreasing = 0;
  for (long n0 : kOracleGrid) {
    const double a = half_width(n0);
    for (long tau : taus)
      for (int sa : {-1, 0, 1})
        for (int sb : {-1, 0, 1}) {
          std::optional<double> prev;
          for (long n : kOracleGrid) {
            const double e = chop_error(n, tau, sa * a, sb * a);
            if (prev && !(e < *prev) && !(e < kFloor && *prev < kFloor)) ++not_decreasing;
            prev = e;
          }
        }
  }
  r.add_row("chop_probability_not_decreasing", static_cast<double>(not_decreasing), 0.0, 0.0, 0.5);
  r.extras["chop_probability_table"] = std::move(table);

  // chop statistics of X+ at tau = 0
  for (long n : kOracleGrid) {
    const double nd = static_cast<double>(n);
    const auto split = conditioned_split(n, 0, p, p);
    const auto mom = chop_moments_approx(nd, p);
    const std::string tag = "n=" + std::to_string(n);
    r.add_row(detail::label("chop_mean_plus", tag), split.x_plus.mean(), mom.mean_plus, 0.0, 5.0 * std::pow(nd, 0.25));
    r.add_row(detail::label("chop_variance_plus", tag), split.x_plus.variance(), mom.variance, 0.0,
              5.0 * std::pow(nd, 0.75));
  }

  // local limit for a signed sum of six conditioned terms at n = 200
  {
    const long n = 200;
    struct Term {
      long tau;
      double q2;
      bool plus;
      int sign;
    };
    const std::array<Term, 6> terms{{{0, p, false, +1},
                                     {1, p, false, -1},
                                     {-1, p, false, +1},
                                     {2, p, true, -1},
                                     {0, p, true, +1},
                                     {-2, p, true, -1}}};
    std::vector<std::pair<Pmf, int>> parts;
    long not_logconcave = 0;
    for (const auto& t : terms) {
      const auto s = conditioned_split(n, t.tau, p, t.q2);
      parts.emplace_back(t.plus ? s.x_plus : s.x_minus, t.sign);
      not_logconcave += !logconcavity_check(parts.back().first);
    }
    const auto sum = convolve_signed(parts);
    const double mu = sum.mean(), sigma = std::sqrt(sum.variance());
    double sup = 0;
    for (long s = sum.min_value(); s <= sum.max_value(); ++s)
      sup = std::max(sup, std::abs(sum.prob(s) - gaussian_pdf(static_cast<double>(s), mu, sigma * sigma)));
    r.add_row("lclt_scaled_sup", sup * sigma, 0.0, 0.0, 0.5);
    r.add_row("lclt_not_logconcave", static_cast<double>(not_logconcave), 0.0, 0.0, 0.5);
    r.extras["lclt"] = {{"mu", mu}, {"sigma", sigma}, {"sup", sup}};
  }
  return r;
}

// ---- dispatch ----------------------------------------------------------------

inline Report run_experiment(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  Report r;
  switch (c.experiment) {
    case Experiment::kWinProb:
      r = run_win_prob(c);
      break;
    case Experiment::kTermination:
      r = run_termination(c);
      break;
    case Experiment::kDayOneJoint:
      r = run_day_one_joint(c);
      break;
    case Experiment::kDayTwoLaw:
      r = run_day_two_law(c);
      break;
    case Experiment::kCellKolmogorov:
      r = run_cell_kolmogorov(c);
      break;
    case Experiment::kModelTransfer:
      r = run_model_transfer(c);
      break;
    case Experiment::kEnumValidation:
      r = run_enum_validation(c);
      break;
    case Experiment::kOracleConvergence:
      r = run_oracle_convergence(c);
      break;
  }
  r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace majdyn
