#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcm/combinatorics.hpp"
#include "pcm/rng.hpp"

namespace pcm {

// Undirected graph on {0..n-1}, dense bitset adjacency, immutable once built.
class Graph {
 public:
  Graph() = default;

  explicit Graph(int n, std::uint64_t seed = 0)
      : n_(n), words_((n + 63) / 64), bits_(static_cast<size_t>(n) * static_cast<size_t>(words_), 0),
        seed_(seed) {
    if (n < 1) throw std::invalid_argument("Graph: need n >= 1");
  }

  int size() const { return n_; }
  int words() const { return words_; }
  std::uint64_t seed() const { return seed_; }

  bool has_edge(int a, int b) const {
    check_vertex(a);
    check_vertex(b);
    if (a == b) return false;
    return (row(a)[static_cast<size_t>(b >> 6)] >> (b & 63)) & 1ULL;
  }

  // +1 edge, -1 non-edge, 0 on the diagonal
  int edge_sign(int a, int b) const {
    check_vertex(a);
    check_vertex(b);
    if (a == b) return 0;
    return has_edge(a, b) ? 1 : -1;
  }

  void set_edge(int a, int b, bool present) {
    check_vertex(a);
    check_vertex(b);
    if (a == b) throw std::invalid_argument("set_edge: self-loop");
    set_bit(a, b, present);
    set_bit(b, a, present);
  }

  std::span<const std::uint64_t> row(int a) const {
    return {bits_.data() + static_cast<size_t>(a) * static_cast<size_t>(words_),
            static_cast<size_t>(words_)};
  }

  int degree(int a) const {
    check_vertex(a);
    int d = 0;
    for (std::uint64_t w : row(a)) d += std::popcount(w);
    return d;
  }

  std::uint64_t edge_count() const {
    std::uint64_t s = 0;
    for (int a = 0; a < n_; ++a) s += static_cast<std::uint64_t>(degree(a));
    return s / 2;
  }

  bool is_clique(std::span<const int> vs) const {
    for (size_t i = 0; i < vs.size(); ++i)
      for (size_t j = i + 1; j < vs.size(); ++j)
        if (!has_edge(vs[i], vs[j])) return false;
    return true;
  }

  void check_vertex(int a) const {
    if (a < 0 || a >= n_) throw std::out_of_range("vertex out of range");
  }

 private:
  void set_bit(int a, int b, bool v) {
    std::uint64_t& w = bits_[static_cast<size_t>(a) * static_cast<size_t>(words_) +
                             static_cast<size_t>(b >> 6)];
    if (v) w |= 1ULL << (b & 63);
    else w &= ~(1ULL << (b & 63));
  }

  int n_ = 0;
  int words_ = 0;
  std::vector<std::uint64_t> bits_;
  std::uint64_t seed_ = 0;
};

// lexicographic rank of the unordered pair {a,b}, a<b, among pairs by (b,a)
inline std::uint64_t pair_index(int a, int b) {
  if (a > b) std::swap(a, b);
  return static_cast<std::uint64_t>(b) * (static_cast<std::uint64_t>(b) - 1) / 2 +
         static_cast<std::uint64_t>(a);
}

// G(n, 1/2) with each pair decided by a counter-based coin on (seed, pair).
inline Graph sample_gnp(int n, std::uint64_t seed) {
  Graph g(n, seed);
  for (int b = 1; b < n; ++b)
    for (int a = 0; a < b; ++a)
      if (pair_coin(seed, pair_index(a, b))) g.set_edge(a, b, true);
  return g;
}

inline Graph plant_clique(const Graph& g, std::span<const int> members) {
  Graph out = g;
  for (size_t i = 0; i < members.size(); ++i) {
    out.check_vertex(members[i]);
    for (size_t j = i + 1; j < members.size(); ++j) out.set_edge(members[i], members[j], true);
  }
  return out;
}

// r_s: +1 toward neighbors, -1 toward non-neighbors, 0 at s itself
struct NeighborhoodVector {
  int source = 0;
  std::vector<double> values;
};

inline NeighborhoodVector neighborhood_vector(const Graph& g, int s) {
  g.check_vertex(s);
  NeighborhoodVector r;
  r.source = s;
  r.values.resize(static_cast<size_t>(g.size()));
  for (int j = 0; j < g.size(); ++j) r.values[static_cast<size_t>(j)] = g.edge_sign(s, j);
  return r;
}

namespace detail {

inline void mask_clear_below(std::vector<std::uint64_t>& mask, int v) {
  // clears bits <= v
  int w = v >> 6;
  for (int i = 0; i < w; ++i) mask[static_cast<size_t>(i)] = 0;
  mask[static_cast<size_t>(w)] &= ~((v & 63) == 63 ? ~0ULL : ((1ULL << ((v & 63) + 1)) - 1));
}

inline void mask_and_row(std::vector<std::uint64_t>& mask, const Graph& g, int v) {
  auto r = g.row(v);
  for (size_t i = 0; i < mask.size(); ++i) mask[i] &= r[i];
}

template <typename Fn>
inline void for_each_clique_rec(const Graph& g, int x, std::vector<int>& cur,
                                std::vector<std::uint64_t>& cand, Fn&& fn) {
  if (static_cast<int>(cur.size()) == x) {
    fn(std::span<const int>(cur));
    return;
  }
  // iterate candidate vertices in ascending order
  for (size_t w = 0; w < cand.size(); ++w) {
    std::uint64_t bitsw = cand[w];
    while (bitsw) {
      int v = static_cast<int>(w * 64) + std::countr_zero(bitsw);
      bitsw &= bitsw - 1;
      std::vector<std::uint64_t> next = cand;
      mask_and_row(next, g, v);
      mask_clear_below(next, v);
      cur.push_back(v);
      for_each_clique_rec(g, x, cur, next, fn);
      cur.pop_back();
    }
  }
}

}  // namespace detail

// Visits every x-clique once, vertices ascending, restricted to allowed mask.
template <typename Fn>
inline void for_each_clique_in(const Graph& g, std::span<const std::uint64_t> allowed, int x,
                               Fn&& fn) {
  if (x < 0 || x > g.size()) return;
  std::vector<int> cur;
  cur.reserve(static_cast<size_t>(x));
  std::vector<std::uint64_t> cand(allowed.begin(), allowed.end());
  if (x == 0) {
    fn(std::span<const int>(cur));
    return;
  }
  detail::for_each_clique_rec(g, x, cur, cand, fn);
}

template <typename Fn>
inline void for_each_clique(const Graph& g, int x, Fn&& fn) {
  std::vector<std::uint64_t> all(static_cast<size_t>(g.words()), 0);
  for (int v = 0; v < g.size(); ++v) all[static_cast<size_t>(v >> 6)] |= 1ULL << (v & 63);
  for_each_clique_in(g, all, x, fn);
}

inline std::uint64_t count_cliques_in(const Graph& g, std::span<const std::uint64_t> allowed,
                                      int x) {
  if (x < 0 || x > g.size()) return 0;
  std::uint64_t c = 0;
  for_each_clique_in(g, allowed, x, [&c](std::span<const int>) { ++c; });
  return c;
}

// N_x(G), exact
inline std::uint64_t count_cliques(const Graph& g, int x) {
  if (x < 0 || x > g.size()) return 0;
  if (x == 0) return 1;
  std::uint64_t c = 0;
  for_each_clique(g, x, [&c](std::span<const int>) { ++c; });
  return c;
}

inline std::vector<int> common_neighbors(const Graph& g, std::span<const int> I) {
  std::vector<std::uint64_t> mask(static_cast<size_t>(g.words()), ~0ULL);
  // trim tail bits
  int tail = g.size() & 63;
  if (tail) mask.back() = (1ULL << tail) - 1;
  for (int v : I) {
    g.check_vertex(v);
    detail::mask_and_row(mask, g, v);
  }
  std::vector<int> out;
  for (size_t w = 0; w < mask.size(); ++w) {
    std::uint64_t bitsw = mask[w];
    while (bitsw) {
      int v = static_cast<int>(w * 64) + std::countr_zero(bitsw);
      bitsw &= bitsw - 1;
      bool in_I = std::find(I.begin(), I.end(), v) != I.end();
      if (!in_I) out.push_back(v);
    }
  }
  return out;
}

// deg_G(I): number of 2d-cliques containing I
inline std::uint64_t clique_degree(const Graph& g, std::span<const int> I, int d) {
  int target = 2 * d;
  if (static_cast<int>(I.size()) > target)
    throw std::invalid_argument("clique_degree: |I| exceeds 2d");
  for (int v : I) g.check_vertex(v);
  if (!g.is_clique(I)) return 0;
  auto ext = common_neighbors(g, I);
  std::vector<std::uint64_t> mask(static_cast<size_t>(g.words()), 0);
  for (int v : ext) mask[static_cast<size_t>(v >> 6)] |= 1ULL << (v & 63);
  return count_cliques_in(g, mask, target - static_cast<int>(I.size()));
}

// --- file format: "n <count>" then 1-based "a b" with a<b, LF endings ---

inline void write_graph(const Graph& g, std::ostream& os) {
  os << "n " << g.size() << "\n";
  for (int b = 1; b < g.size(); ++b)
    for (int a = 0; a < b; ++a)
      if (g.has_edge(a, b)) os << (a + 1) << " " << (b + 1) << "\n";
}

inline void write_graph_file(const Graph& g, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("write_graph_file: cannot open " + path);
  write_graph(g, f);
}

inline Graph read_graph(std::istream& is) {
  std::string tag;
  int n = 0;
  if (!(is >> tag >> n) || tag != "n") throw std::runtime_error("read_graph: bad header");
  Graph g(n);
  int a, b;
  while (is >> a >> b) {
    if (a < 1 || b < 1 || a > n || b > n || a >= b)
      throw std::runtime_error("read_graph: bad edge line");
    g.set_edge(a - 1, b - 1, true);
  }
  return g;
}

inline Graph read_graph_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_graph_file: cannot open " + path);
  return read_graph(f);
}

}  // namespace pcm
