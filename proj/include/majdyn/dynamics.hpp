// SPDX-License-Identifier: Apache-2.0
//
// Synchronous majority dynamics: every vertex switches to the opposite opinion
// when strictly more of its neighbours hold it, and keeps its opinion on a tie.
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "majdyn/analytic.hpp"
#include "majdyn/errors.hpp"
#include "majdyn/graph.hpp"

namespace majdyn {

/// One synchronous update.
inline Coloring step(const OpinionGraph& g, const Coloring& c) {
  const std::size_t n = g.num_vertices();
  if (c.size() != n) throw InvalidInput("step: coloring size does not match the graph");
  std::vector<std::uint64_t> red(g.words_per_row(), 0);
  for (std::size_t v = 0; v < n; ++v)
    if (c.opinions[v] == Opinion::kRed) red[v / 64] |= 1ULL << (v % 64);

  Coloring next;
  next.opinions.resize(n);
  next.step_index = c.step_index + 1;
  for (std::size_t v = 0; v < n; ++v) {
    const auto row = g.row(v);
    long r = 0;
    for (std::size_t w = 0; w < row.size(); ++w) r += std::popcount(row[w] & red[w]);
    const long b = static_cast<long>(g.degree(v)) - r;
    const Opinion cur = c.opinions[v];
    const bool flip = cur == Opinion::kRed ? b > r : r > b;
    next.opinions[v] = flip ? opposite(cur) : cur;
  }
  return next;
}

struct Outcome {
  enum class Kind { kRedWins, kBlueWins, kCycle, kMaxStepsReached };
  Kind kind = Kind::kMaxStepsReached;
  long step = 0;    ///< step at which consensus was reached
  long period = 0;  ///< cycle period (1 or 2)

  bool consensus() const noexcept { return kind == Kind::kRedWins || kind == Kind::kBlueWins; }

  std::string describe() const {
    switch (kind) {
      case Kind::kRedWins:
        return "RedWins(" + std::to_string(step) + ")";
      case Kind::kBlueWins:
        return "BlueWins(" + std::to_string(step) + ")";
      case Kind::kCycle:
        return "Cycle(" + std::to_string(period) + ")";
      case Kind::kMaxStepsReached:
        break;
    }
    return "MaxStepsReached";
  }
};

struct Trajectory {
  std::vector<Coloring> colorings;
  Outcome outcome;
  std::vector<long> lead_history;

  long steps() const noexcept { return static_cast<long>(colorings.size()) - 1; }
};

inline constexpr long kDefaultMaxSteps = 16;

/// Iterates `step` until consensus, a repeated state, or `max_steps` updates.
/// A repeat is detected against the two previous colorings.
inline Trajectory run(const OpinionGraph& g, const Coloring& start, long max_steps = kDefaultMaxSteps) {
  if (max_steps < 1) throw InvalidParameters("run: max_steps must be at least 1");
  if (start.size() != g.num_vertices()) throw InvalidInput("run: coloring size does not match the graph");
  Trajectory t;
  t.colorings.push_back(start);
  t.lead_history.push_back(start.lead());
  for (;;) {
    const Coloring& cur = t.colorings.back();
    if (cur.monochromatic()) {
      const bool red = cur.opinions.empty() || cur.opinions.front() == Opinion::kRed;
      t.outcome.kind = red ? Outcome::Kind::kRedWins : Outcome::Kind::kBlueWins;
      t.outcome.step = cur.step_index;
      return t;
    }
    const std::size_t len = t.colorings.size();
    if (len >= 2 && cur.same_state(t.colorings[len - 2])) {
      t.outcome.kind = Outcome::Kind::kCycle;
      t.outcome.period = 1;
      return t;
    }
    if (len >= 3 && cur.same_state(t.colorings[len - 3])) {
      t.outcome.kind = Outcome::Kind::kCycle;
      t.outcome.period = 2;
      return t;
    }
    if (static_cast<long>(len) - 1 >= max_steps) {
      t.outcome.kind = Outcome::Kind::kMaxStepsReached;
      return t;
    }
    Coloring next = step(g, cur);
    t.lead_history.push_back(next.lead());
    t.colorings.push_back(std::move(next));
  }
}

/// Cell occupancies V_x and normalized degrees into each cell.
///
/// Cell index x has bit i set when the vertex was blue at step i, so for k = 1
/// cell 0 is R_0 and cell 1 is B_0.
struct CellStats {
  int k = 1;
  std::vector<std::size_t> occupancy;  ///< |V_x|, indexed by x
  std::vector<std::uint32_t> cell_of;  ///< x for every vertex
  std::vector<double> normalized;      ///< row-major: vertex v, cell x

  std::size_t cells() const noexcept { return occupancy.size(); }
  double normalized_degree(std::size_t v, std::size_t x) const { return normalized.at(v * cells() + x); }

  /// Normalized degree vectors of the vertices in cell x (the sample behind L_x).
  std::vector<std::vector<double>> cell_sample(std::size_t x) const {
    std::vector<std::vector<double>> out;
    for (std::size_t v = 0; v < cell_of.size(); ++v) {
      if (cell_of[v] != x) continue;
      out.emplace_back(normalized.begin() + static_cast<long>(v * cells()),
                       normalized.begin() + static_cast<long>((v + 1) * cells()));
    }
    return out;
  }
};

inline CellStats cell_stats(const OpinionGraph& g, const Trajectory& t, int k, const ModelParams& params) {
  params.validate_open();
  if (k < 1 || k > 3) throw InvalidInput("cell_stats: depth must be 1, 2 or 3");
  if (static_cast<long>(t.colorings.size()) < k) throw InvalidInput("cell_stats: trajectory has fewer than k steps");
  const std::size_t n = g.num_vertices();
  const std::size_t cells = std::size_t{1} << k;
  CellStats s;
  s.k = k;
  s.occupancy.assign(cells, 0);
  s.cell_of.assign(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    std::uint32_t x = 0;
    for (int i = 0; i < k; ++i)
      if (t.colorings[static_cast<std::size_t>(i)].opinions.at(v) == Opinion::kBlue) x |= 1u << i;
    s.cell_of[v] = x;
    ++s.occupancy[x];
  }
  std::vector<VertexSet> members(cells, VertexSet(n));
  for (std::size_t v = 0; v < n; ++v) members[s.cell_of[v]].insert(v);

  const double p = params.p;
  const double scale = std::sqrt(p * (1.0 - p) * static_cast<double>(params.n));
  s.normalized.resize(n * cells);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t x = 0; x < cells; ++x)
      s.normalized[v * cells + x] =
          (static_cast<double>(degree_into(g, v, members[x])) - p * static_cast<double>(s.occupancy[x])) / scale;
  return s;
}

struct TypicalityReport {
  double x_prime = 0.0;
  double y_prime = 0.0;
  bool e3 = false;  ///< |x'|, |y'| <= C sqrt(log n)
  std::uint64_t cross_edges = 0;
  std::uint64_t red_internal = 0;
  std::uint64_t blue_internal = 0;
  bool e4_cross = false;
  bool e4_red = false;
  bool e4_blue = false;

  bool e4() const noexcept { return e4_cross && e4_red && e4_blue; }
  bool all() const noexcept { return e3 && e4(); }
};

/// Checks the day-one window |x'|, |y'| <= C sqrt(log n) and the initial edge
/// counts against p n (n + delta) and p C(|part|, 2), each within c n^(13/10).
inline TypicalityReport typicality_check(const OpinionGraph& g, const Trajectory& t, const ModelParams& params,
                                         double big_c = 3.0, double small_c = 1.0) {
  params.validate();
  if (t.colorings.size() < 2) throw InvalidInput("typicality_check: trajectory needs at least one step");
  const auto& c0 = t.colorings[0];
  const auto& c1 = t.colorings[1];
  const std::size_t n = g.num_vertices();

  TypicalityReport rep;
  const auto red0 = c0.red_set();
  const auto blue0 = c0.blue_set();
  std::uint64_t stay_red = 0, stay_blue = 0, red_deg = 0, blue_deg = 0;
  for (std::size_t v = 0; v < n; ++v) {
    const bool was_red = c0.opinions[v] == Opinion::kRed;
    if (was_red && c1.opinions[v] == Opinion::kRed) ++stay_red;
    if (!was_red && c1.opinions[v] == Opinion::kBlue) ++stay_blue;
    if (was_red) {
      red_deg += degree_into(g, v, red0);
      rep.cross_edges += degree_into(g, v, blue0);
    } else {
      blue_deg += degree_into(g, v, blue0);
    }
  }
  rep.red_internal = red_deg / 2;
  rep.blue_internal = blue_deg / 2;

  const double nn = static_cast<double>(params.n);
  if (params.p > 0.0 && params.p < 1.0 && params.n >= 2) {
    const auto centering = day_one_centering(params);
    rep.x_prime = centering.x_prime(static_cast<double>(stay_red));
    rep.y_prime = centering.y_prime(static_cast<double>(stay_blue));
    const double band = big_c * std::sqrt(std::log(nn));
    rep.e3 = std::abs(rep.x_prime) <= band && std::abs(rep.y_prime) <= band;
  } else {
    rep.e3 = true;  // the window is undefined at p in {0, 1}; nothing to check
  }

  const double width = small_c * std::pow(nn, 1.3);
  const double p = params.p;
  const double reds = static_cast<double>(red0.size());
  const double blues = static_cast<double>(blue0.size());
  auto within = [&](std::uint64_t count, double target) {
    return std::abs(static_cast<double>(count) - target) <= width;
  };
  rep.e4_cross = within(rep.cross_edges, p * reds * blues);
  rep.e4_red = within(rep.red_internal, p * reds * (reds - 1.0) / 2.0);
  rep.e4_blue = within(rep.blue_internal, p * blues * (blues - 1.0) / 2.0);
  return rep;
}

}  // namespace majdyn
