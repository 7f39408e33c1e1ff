// SPDX-License-Identifier: Apache-2.0
//
// Dense random graphs stored as packed bit rows, plus the opinion types that
// majority dynamics runs over.
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "majdyn/errors.hpp"
#include "majdyn/rng.hpp"

namespace majdyn {

/// Experiment instance: G(2n + delta, p) with n + delta red and n blue vertices.
struct ModelParams {
  long n = 1;
  long delta = 0;
  double p = 0.5;

  long num_vertices() const noexcept { return 2 * n + delta; }

  /// Graph-sampling domain: N >= 2, delta >= 0, p in [0, 1].
  void validate() const {
    if (n < 0 || delta < 0) throw InvalidParameters("ModelParams: n and delta must be non-negative");
    if (num_vertices() < 2) throw InvalidParameters("ModelParams: need 2n + delta >= 2");
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameters("ModelParams: p must lie in [0, 1]");
  }

  /// Analytic-formula domain: additionally 0 < p < 1.
  void validate_open() const {
    validate();
    if (p <= 0.0 || p >= 1.0) throw SingularParameters("formula requires 0 < p < 1");
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

inline constexpr std::size_t words_for(std::size_t bits) noexcept { return (bits + 63) / 64; }

/// Fixed-size set of vertex indices as a bitmask.
class VertexSet {
 public:
  VertexSet() = default;
  explicit VertexSet(std::size_t universe) : universe_(universe), words_(words_for(universe), 0) {}

  VertexSet(std::size_t universe, std::initializer_list<std::size_t> members) : VertexSet(universe) {
    for (auto v : members) insert(v);
  }

  static VertexSet all(std::size_t universe) {
    VertexSet s(universe);
    for (std::size_t v = 0; v < universe; ++v) s.insert(v);
    return s;
  }

  std::size_t universe() const noexcept { return universe_; }

  void insert(std::size_t v) {
    check(v);
    words_[v / 64] |= 1ULL << (v % 64);
  }
  void erase(std::size_t v) {
    check(v);
    words_[v / 64] &= ~(1ULL << (v % 64));
  }
  bool contains(std::size_t v) const {
    check(v);
    return (words_[v / 64] >> (v % 64)) & 1ULL;
  }

  std::size_t size() const noexcept {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::span<std::uint64_t> words() noexcept { return words_; }

  VertexSet operator&(const VertexSet& o) const {
    same_universe(o);
    VertexSet r(universe_);
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = words_[i] & o.words_[i];
    return r;
  }

  /// Complement within the universe.
  VertexSet complement() const {
    VertexSet r(universe_);
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = ~words_[i];
    if (universe_ % 64) r.words_.back() &= (1ULL << (universe_ % 64)) - 1;
    return r;
  }

  friend bool operator==(const VertexSet&, const VertexSet&) = default;

 private:
  void check(std::size_t v) const {
    if (v >= universe_) throw std::out_of_range("VertexSet: vertex " + std::to_string(v) + " out of range");
  }
  void same_universe(const VertexSet& o) const {
    if (o.universe_ != universe_) throw InvalidInput("VertexSet: universe mismatch");
  }

  std::size_t universe_ = 0;
  std::vector<std::uint64_t> words_;
};

namespace detail {

// In-place transpose of a 64x64 bit matrix; bit c of a[r] is entry (r, c).
inline void transpose64(std::array<std::uint64_t, 64>& a) noexcept {
  std::uint64_t m = 0x00000000FFFFFFFFULL;
  for (int j = 32; j != 0; j >>= 1, m ^= (m << j)) {
    for (int k = 0; k < 64; k = ((k | j) + 1) & ~j) {
      const std::uint64_t t = ((a[k] >> j) ^ a[k | j]) & m;
      a[k | j] ^= t;
      a[k] ^= t << j;
    }
  }
}

}  // namespace detail

/// Simple undirected graph on N vertices with packed symmetric adjacency rows.
/// Immutable after construction.
class OpinionGraph {
 public:
  OpinionGraph() = default;

  /// Builds from an explicit edge list (used for hand-constructed instances).
  static OpinionGraph from_edges(std::size_t num_vertices,
                                 std::span<const std::pair<std::size_t, std::size_t>> edges) {
    OpinionGraph g(num_vertices);
    for (auto [u, v] : edges) {
      if (u >= num_vertices || v >= num_vertices) throw std::out_of_range("OpinionGraph: edge endpoint out of range");
      if (u == v) throw InvalidInput("OpinionGraph: self-loops are not allowed");
      g.set(u, v);
      g.set(v, u);
    }
    g.finish();
    return g;
  }

  static OpinionGraph from_edges(std::size_t num_vertices,
                                 std::initializer_list<std::pair<std::size_t, std::size_t>> edges) {
    std::vector<std::pair<std::size_t, std::size_t>> e(edges);
    return from_edges(num_vertices, std::span<const std::pair<std::size_t, std::size_t>>(e));
  }

  static OpinionGraph complete(std::size_t num_vertices) {
    OpinionGraph g(num_vertices);
    for (std::size_t u = 0; u < num_vertices; ++u)
      for (std::size_t v = 0; v < num_vertices; ++v)
        if (u != v) g.set(u, v);
    g.finish();
    return g;
  }

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t words_per_row() const noexcept { return wpr_; }

  std::span<const std::uint64_t> row(std::size_t v) const {
    if (v >= n_) throw std::out_of_range("OpinionGraph: vertex out of range");
    return {bits_.data() + v * wpr_, wpr_};
  }

  bool adjacent(std::size_t u, std::size_t v) const {
    if (u >= n_ || v >= n_) throw std::out_of_range("OpinionGraph: vertex out of range");
    return (bits_[u * wpr_ + v / 64] >> (v % 64)) & 1ULL;
  }

  std::size_t degree(std::size_t v) const {
    if (v >= n_) throw std::out_of_range("OpinionGraph: vertex out of range");
    return degrees_[v];
  }

  std::span<const std::uint32_t> degrees() const noexcept { return degrees_; }

  std::uint64_t edge_count() const noexcept {
    std::uint64_t s = 0;
    for (auto d : degrees_) s += d;
    return s / 2;
  }

  friend OpinionGraph sample_gnp_vertices(std::size_t, double, std::uint64_t);

 private:
  explicit OpinionGraph(std::size_t n) : n_(n), wpr_(words_for(n)), bits_(n * words_for(n), 0) {}

  void set(std::size_t u, std::size_t v) { bits_[u * wpr_ + v / 64] |= 1ULL << (v % 64); }

  void finish() {
    degrees_.assign(n_, 0);
    for (std::size_t v = 0; v < n_; ++v) {
      std::uint32_t d = 0;
      for (std::size_t w = 0; w < wpr_; ++w) d += static_cast<std::uint32_t>(std::popcount(bits_[v * wpr_ + w]));
      degrees_[v] = d;
    }
  }

  // Mirrors the strict upper triangle into the lower one, 64x64 blocks at a time.
  void symmetrize_from_upper() {
    const std::size_t blocks = wpr_;
    std::array<std::uint64_t, 64> tile{};
    for (std::size_t bi = 0; bi < blocks; ++bi) {
      for (std::size_t bj = bi; bj < blocks; ++bj) {
        for (std::size_t r = 0; r < 64; ++r) {
          const std::size_t row_index = bi * 64 + r;
          tile[r] = row_index < n_ ? bits_[row_index * wpr_ + bj] : 0;
        }
        detail::transpose64(tile);
        for (std::size_t c = 0; c < 64; ++c) {
          const std::size_t row_index = bj * 64 + c;
          if (row_index < n_) bits_[row_index * wpr_ + bi] |= tile[c];
        }
      }
    }
  }

  std::size_t n_ = 0;
  std::size_t wpr_ = 0;
  std::vector<std::uint64_t> bits_;
  std::vector<std::uint32_t> degrees_;
};

/// G(N, p) on `num_vertices` vertices. Each unordered pair is an edge
/// independently with probability p (quantized to 2^-64); the same seed gives
/// a bit-identical graph.
inline OpinionGraph sample_gnp_vertices(std::size_t num_vertices, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameters("sample_gnp: p must lie in [0, 1]");
  OpinionGraph g(num_vertices);
  Xoshiro256 eng(seed);
  const BernoulliWords bernoulli(p);
  const std::size_t n = num_vertices;
  const std::size_t wpr = g.wpr_;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::uint64_t* row = g.bits_.data() + i * wpr;
    const std::size_t first = (i + 1) / 64;
    for (std::size_t w = first; w < wpr; ++w) {
      std::uint64_t bits = bernoulli(eng);
      const std::size_t lo = w * 64;
      // keep columns j > i; first word starts at or below i + 1, so the shift is < 64
      if (lo <= i) bits &= ~0ULL << (i - lo + 1);
      if (lo + 64 > n) bits &= (1ULL << (n - lo)) - 1;
      row[w] = bits;
    }
  }
  g.symmetrize_from_upper();
  g.finish();
  return g;
}

/// G(2n + delta, p) for an experiment instance.
inline OpinionGraph sample_gnp(const ModelParams& params, std::uint64_t seed) {
  params.validate();
  return sample_gnp_vertices(static_cast<std::size_t>(params.num_vertices()), params.p, seed);
}

/// Count of neighbours of v inside `target`.
inline std::size_t degree_into(const OpinionGraph& g, std::size_t v, const VertexSet& target) {
  if (target.universe() != g.num_vertices()) throw InvalidInput("degree_into: vertex set universe mismatch");
  const auto row = g.row(v);
  const auto tw = target.words();
  std::size_t c = 0;
  for (std::size_t w = 0; w < row.size(); ++w) c += static_cast<std::size_t>(std::popcount(row[w] & tw[w]));
  return c;
}

enum class Opinion : std::uint8_t { kRed = 0, kBlue = 1 };

inline constexpr Opinion opposite(Opinion o) noexcept {
  return o == Opinion::kRed ? Opinion::kBlue : Opinion::kRed;
}

/// Opinions of every vertex at step `step_index`.
struct Coloring {
  std::vector<Opinion> opinions;
  long step_index = 0;

  std::size_t size() const noexcept { return opinions.size(); }

  std::size_t red_count() const noexcept {
    return static_cast<std::size_t>(std::count(opinions.begin(), opinions.end(), Opinion::kRed));
  }
  std::size_t blue_count() const noexcept { return opinions.size() - red_count(); }
  long lead() const noexcept { return static_cast<long>(red_count()) - static_cast<long>(blue_count()); }

  VertexSet members(Opinion o) const {
    VertexSet s(opinions.size());
    for (std::size_t v = 0; v < opinions.size(); ++v)
      if (opinions[v] == o) s.insert(v);
    return s;
  }
  VertexSet red_set() const { return members(Opinion::kRed); }
  VertexSet blue_set() const { return members(Opinion::kBlue); }

  bool monochromatic() const noexcept {
    return std::adjacent_find(opinions.begin(), opinions.end(), std::not_equal_to<>{}) == opinions.end();
  }

  /// Equality of opinions only; step indices are ignored.
  bool same_state(const Coloring& o) const noexcept { return opinions == o.opinions; }
};

/// Vertices 0 .. n+delta-1 red, the remaining n blue.
inline Coloring initial_coloring(const ModelParams& params) {
  params.validate();
  Coloring c;
  c.opinions.assign(static_cast<std::size_t>(params.num_vertices()), Opinion::kBlue);
  std::fill_n(c.opinions.begin(), params.n + params.delta, Opinion::kRed);
  c.step_index = 0;
  return c;
}

}  // namespace majdyn
