#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcm/eig.hpp"
#include "pcm/graph.hpp"
#include "pcm/johnson.hpp"
#include "pcm/moments.hpp"

namespace pcm {

// q-pattern: fixed-intersection position sets Z_l, Z_r in [d] plus a bipartite
// edge set B on the complementary positions, stored as bitmasks.
struct Pattern {
  int d = 0;
  int q = 0;
  std::uint16_t zl = 0, zr = 0;  // position masks, popcount q each
  std::uint32_t bmask = 0;       // cell (i,j) -> bit i*d + j

  std::uint16_t left_support() const {  // B_l: left positions of nonzero degree
    std::uint16_t s = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (bmask & (1u << (i * d + j))) s |= static_cast<std::uint16_t>(1u << i);
    return s;
  }
  std::uint16_t right_support() const {
    std::uint16_t s = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (bmask & (1u << (i * d + j))) s |= static_cast<std::uint16_t>(1u << j);
    return s;
  }
  int left_support_size() const { return std::popcount(left_support()); }
  int right_support_size() const { return std::popcount(right_support()); }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (bmask & (1u << (i * d + j))) e.emplace_back(i, j);
    return e;
  }

  bool well_formed() const {
    if (std::popcount(zl) != q || std::popcount(zr) != q) return false;
    for (auto [i, j] : edges())
      if ((zl >> i) & 1 || (zr >> j) & 1) return false;
    return true;
  }

  friend bool operator==(const Pattern& a, const Pattern& b) {
    return a.d == b.d && a.q == b.q && a.zl == b.zl && a.zr == b.zr && a.bmask == b.bmask;
  }
  friend bool operator<(const Pattern& a, const Pattern& b) {
    return std::tie(a.zl, a.zr, a.bmask) < std::tie(b.zl, b.zr, b.bmask);
  }
};

// All q-patterns at half-degree d: every (Z_l, Z_r) pair and every nonempty B
// on the complementary positions.
inline std::vector<Pattern> enumerate_patterns(int d, int q) {
  if (q < 0 || q > d) throw std::invalid_argument("enumerate_patterns: need 0 <= q <= d");
  std::vector<Pattern> out;
  for (std::uint16_t zl = 0; zl < (1u << d); ++zl) {
    if (std::popcount(zl) != q) continue;
    for (std::uint16_t zr = 0; zr < (1u << d); ++zr) {
      if (std::popcount(zr) != q) continue;
      std::vector<int> cells;
      for (int i = 0; i < d; ++i) {
        if ((zl >> i) & 1) continue;
        for (int j = 0; j < d; ++j) {
          if ((zr >> j) & 1) continue;
          cells.push_back(i * d + j);
        }
      }
      for (std::uint32_t s = 1; s < (1u << cells.size()); ++s) {
        Pattern p;
        p.d = d;
        p.q = q;
        p.zl = zl;
        p.zr = zr;
        for (size_t c = 0; c < cells.size(); ++c)
          if (s & (1u << c)) p.bmask |= 1u << cells[c];
        out.push_back(p);
      }
    }
  }
  return out;
}

namespace detail {

inline std::uint16_t apply_perm_mask(std::span<const int> sigma, std::uint16_t mask, int d) {
  std::uint16_t out = 0;
  for (int i = 0; i < d; ++i)
    if ((mask >> i) & 1) out |= static_cast<std::uint16_t>(1u << sigma[static_cast<size_t>(i)]);
  return out;
}

inline std::vector<std::vector<int>> all_perms(int d) {
  std::vector<int> p(static_cast<size_t>(d));
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

}  // namespace detail

// sigma . (B, Z_l, Z_r) = (sigma.B, sigma(Z_l), Z_r), edges (i,j) -> (sigma(i), j)
inline Pattern left_act(std::span<const int> sigma, const Pattern& p) {
  Pattern out = p;
  out.zl = detail::apply_perm_mask(sigma, p.zl, p.d);
  out.bmask = 0;
  for (auto [i, j] : p.edges()) out.bmask |= 1u << (sigma[static_cast<size_t>(i)] * p.d + j);
  return out;
}

inline Pattern right_act(const Pattern& p, std::span<const int> sigma) {
  Pattern out = p;
  out.zr = detail::apply_perm_mask(sigma, p.zr, p.d);
  out.bmask = 0;
  for (auto [i, j] : p.edges()) out.bmask |= 1u << (i * p.d + sigma[static_cast<size_t>(j)]);
  return out;
}

enum class Side { left, right };

// Partition of a pattern list into similarity classes under the S_d orbit.
inline std::vector<std::vector<Pattern>> similarity_classes(std::span<const Pattern> patterns,
                                                            Side side) {
  if (patterns.empty()) return {};
  auto perms = detail::all_perms(patterns[0].d);
  std::vector<std::vector<Pattern>> classes;
  std::vector<bool> used(patterns.size(), false);
  for (size_t i = 0; i < patterns.size(); ++i) {
    if (used[i]) continue;
    std::vector<Pattern> orbit;
    for (const auto& sigma : perms) {
      Pattern im = side == Side::left ? left_act(sigma, patterns[i]) : right_act(patterns[i], sigma);
      if (std::find(orbit.begin(), orbit.end(), im) == orbit.end()) orbit.push_back(im);
    }
    std::sort(orbit.begin(), orbit.end());
    for (size_t j = i; j < patterns.size(); ++j) {
      if (!used[j] && std::binary_search(orbit.begin(), orbit.end(), patterns[j])) used[j] = true;
    }
    classes.push_back(orbit);
  }
  return classes;
}

// Q(I,J) = f(edge signs of the transplanted copy of B) when zeta_I(Z_l) =
// zeta_J(Z_r), else 0.  Labels are handed to f in the cell order of
// Pattern::edges(); the diagonal convention g_aa = 0 applies.
inline IndexedMatrix patterned_matrix(
    const Graph& g, const Pattern& p,
    const std::function<double(std::span<const int>)>& f) {
  if (!p.well_formed()) throw std::invalid_argument("patterned_matrix: malformed pattern");
  const int n = g.size();
  const int d = p.d;
  IndexedMatrix m = make_indexed(n, d, d, false);
  auto subs = all_subsets(n, d);
  auto edges = p.edges();
  const Eigen::Index N = m.rows();
  std::vector<int> labels(edges.size());
  std::vector<int> zl_pos, zr_pos;
  for (int i = 0; i < d; ++i) {
    if ((p.zl >> i) & 1) zl_pos.push_back(i);
    if ((p.zr >> i) & 1) zr_pos.push_back(i);
  }
  for (Eigen::Index r = 0; r < N; ++r) {
    const auto& I = subs[static_cast<size_t>(r)];
    for (Eigen::Index c = 0; c < N; ++c) {
      const auto& J = subs[static_cast<size_t>(c)];
      bool match = true;
      for (size_t k = 0; k < zl_pos.size() && match; ++k)
        match = I[static_cast<size_t>(zl_pos[k])] == J[static_cast<size_t>(zr_pos[k])];
      if (!match) continue;
      for (size_t e = 0; e < edges.size(); ++e)
        labels[e] = g.edge_sign(I[static_cast<size_t>(edges[e].first)],
                                J[static_cast<size_t>(edges[e].second)]);
      m.a(r, c) = f(labels);
    }
  }
  return m;
}

// zeta_I(Z_l) and zeta_J(Z_r) are sorted picks, so equality as sets reduces to
// positionwise equality only when the position lists are sorted the same way;
// compare as sets to be safe.
inline bool zeta_sets_match(std::span<const int> I, std::uint16_t zl, std::span<const int> J,
                            std::uint16_t zr, int d) {
  std::array<int, 8> a{}, b{};
  int ka = 0, kb = 0;
  for (int i = 0; i < d; ++i) {
    if ((zl >> i) & 1) a[static_cast<size_t>(ka++)] = I[static_cast<size_t>(i)];
    if ((zr >> i) & 1) b[static_cast<size_t>(kb++)] = J[static_cast<size_t>(i)];
  }
  if (ka != kb) return false;
  for (int i = 0; i < ka; ++i)
    if (a[static_cast<size_t>(i)] != b[static_cast<size_t>(i)]) return false;
  return true;
}

// E + L + Delta = M'
struct DeviationSplit {
  IndexedMatrix mprime, e, l, delta;
};

// L(I,J) = alpha(t) (1-p(t))/p(t) when all external pairs are edges, else
// -alpha(t), with t = |I cap J|.
inline IndexedMatrix locally_random_part(const Graph& g, int d, double omega) {
  const int n = g.size();
  ScalarTable st = scalar_table(n, d, omega);
  IndexedMatrix m = make_indexed(n, d, d, true);
  auto subs = all_subsets(n, d);
  const Eigen::Index N = m.rows();
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto& I = subs[static_cast<size_t>(i)];
    for (Eigen::Index j = i; j < N; ++j) {
      const auto& J = subs[static_cast<size_t>(j)];
      int t = intersection_size(I, J);
      bool ext_in = true;
      for (int a : I) {
        for (int b : J) {
          if (a == b) continue;
          // skip pairs inside I or inside J
          bool a_in_J = std::find(J.begin(), J.end(), a) != J.end();
          bool b_in_I = std::find(I.begin(), I.end(), b) != I.end();
          if (a_in_J || b_in_I) continue;
          if (!g.has_edge(a, b)) {
            ext_in = false;
            break;
          }
        }
        if (!ext_in) break;
      }
      double pt = st.p[static_cast<size_t>(t)];
      double v = ext_in ? st.alpha[static_cast<size_t>(t)] * (1.0 - pt) / pt
                        : -st.alpha[static_cast<size_t>(t)];
      m.a(i, j) = v;
      m.a(j, i) = v;
    }
  }
  return m;
}

inline DeviationSplit split(const Graph& g, int d, double omega) {
  DeviationSplit s;
  s.mprime = filled_matrix(g, d, omega);
  s.e = expectation_matrix(g.size(), d, omega);
  s.l = locally_random_part(g, d, omega);
  s.delta = s.mprime;
  s.delta.a -= s.e.a;
  s.delta.a -= s.l.a;
  s.delta.symmetric = true;
  return s;
}

// One Fourier piece of L_q.  `tilde` keeps every zeta-qualifying entry; the
// plain variant zeroes entries whose non-Z parts intersect, pinning
// |I cap J| = q exactly.  Scale alpha(q) * 2^((d-q)^2) makes
// 2^{-(d-q)^2} sum_B pieces reproduce L_q entrywise.
inline IndexedMatrix fourier_piece(const Graph& g, const Pattern& p, double omega, bool tilde) {
  const int n = g.size();
  const int d = p.d;
  ScalarTable st = scalar_table(n, d, omega);
  double scale = st.alpha[static_cast<size_t>(p.q)] *
                 std::exp2(static_cast<double>((d - p.q)) * (d - p.q));
  IndexedMatrix m = make_indexed(n, d, d, false);
  auto subs = all_subsets(n, d);
  auto edges = p.edges();
  const Eigen::Index N = m.rows();
  for (Eigen::Index r = 0; r < N; ++r) {
    const auto& I = subs[static_cast<size_t>(r)];
    for (Eigen::Index c = 0; c < N; ++c) {
      const auto& J = subs[static_cast<size_t>(c)];
      if (!zeta_sets_match(I, p.zl, J, p.zr, d)) continue;
      if (!tilde) {
        // non-Z parts must be disjoint
        int overlap = 0;
        for (int i = 0; i < d && !overlap; ++i) {
          if ((p.zl >> i) & 1) continue;
          for (int j = 0; j < d; ++j) {
            if ((p.zr >> j) & 1) continue;
            if (I[static_cast<size_t>(i)] == J[static_cast<size_t>(j)]) {
              overlap = 1;
              break;
            }
          }
        }
        if (overlap) continue;
      }
      double prod = scale;
      for (auto [pi, pj] : edges)
        prod *= g.edge_sign(I[static_cast<size_t>(pi)], J[static_cast<size_t>(pj)]);
      m.a(r, c) = prod;
    }
  }
  return m;
}

struct FourierPiece {
  Pattern pattern;
  IndexedMatrix plain;
  IndexedMatrix tilde;
};

// All pieces of L_q.  d = 2 is exhaustive; d = 3 sits behind the size guard.
inline std::vector<FourierPiece> fourier_decompose_L(const Graph& g, int d, double omega, int q,
                                                     bool allow_large = false) {
  if (d > 3) throw std::invalid_argument("fourier_decompose_L: d > 3 unsupported");
  if (d == 3 && !allow_large)
    throw std::invalid_argument("fourier_decompose_L: d = 3 requires allow_large");
  std::vector<FourierPiece> out;
  for (const Pattern& p : enumerate_patterns(d, q)) {
    FourierPiece fp;
    fp.pattern = p;
    fp.plain = fourier_piece(g, p, omega, false);
    fp.tilde = fourier_piece(g, p, omega, true);
    out.push_back(std::move(fp));
  }
  return out;
}

// Sum of tilde pieces over one similarity class.
inline IndexedMatrix symmetrized_sum(const Graph& g, std::span<const Pattern> cls, double omega) {
  if (cls.empty()) throw std::invalid_argument("symmetrized_sum: empty class");
  IndexedMatrix sum = fourier_piece(g, cls[0], omega, true);
  for (size_t i = 1; i < cls.size(); ++i) sum.a += fourier_piece(g, cls[i], omega, true).a;
  return sum;
}

struct KernelCheckEntry {
  int space = 0;
  double rel_norm = 0.0;
};

struct KernelReport {
  std::vector<KernelCheckEntry> entries;  // one per forced annihilation
  bool pass = true;
  double worst = 0.0;
};

// Forced annihilations of a symmetrized class sum: Pi_j Q = 0 for
// j > |B_l| + q on the left; Q Pi_i = 0 for i > |B_r| + q on the right.
inline KernelReport kernel_check(const IndexedMatrix& qsym, const SymBasis& basis,
                                 const Pattern& representative, Side side, double tol = 1e-8) {
  KernelReport rep;
  double qn = std::max(qsym.a.norm(), 1e-300);
  int support = side == Side::left ? representative.left_support_size()
                                   : representative.right_support_size();
  int threshold = support + representative.q;
  for (int j = threshold + 1; j <= basis.d; ++j) {
    const Mat& b = basis.basis[static_cast<size_t>(j)];
    double nrm = side == Side::left ? (b.transpose() * qsym.a).norm() : (qsym.a * b).norm();
    KernelCheckEntry e{j, nrm / qn};
    rep.entries.push_back(e);
    rep.worst = std::max(rep.worst, e.rel_norm);
    if (e.rel_norm > tol) rep.pass = false;
  }
  return rep;
}

struct NormEstimate {
  double power = 0.0;
  double power_residual = 0.0;
  double trace = 0.0;
  double gershgorin = 0.0;
};

// Power estimate with certificate, trace-method estimate at l = ceil(log2 n),
// and the row-sum upper bound.
inline NormEstimate spectral_norm(const IndexedMatrix& m, int trace_ell = 0) {
  NormEstimate est;
  bool sym = m.a.rows() == m.a.cols() &&
             (m.a - m.a.transpose()).cwiseAbs().maxCoeff() <=
                 1e-12 * std::max(1.0, m.a.cwiseAbs().maxCoeff());
  SpectrumEstimate p = spectral_norm_power(m.a, sym);
  est.power = p.value;
  est.power_residual = p.residual;
  est.trace = spectral_norm_trace(m.a, trace_ell);
  est.gershgorin = gershgorin_bound(m.a);
  return est;
}

struct BlockNormRow {
  int i = 0, j = 0;
  std::string matrix;  // "E", "L" or "Delta"
  double norm = 0.0;
  std::string predicted_scale;
  double predicted_value = 0.0;
};

// ||Pi_i X Pi_j|| for X in {E, L, Delta} with the paper-scale predictions.
inline std::vector<BlockNormRow> block_norm_table(const DeviationSplit& s, const SymBasis& basis,
                                                  double omega) {
  const int d = basis.d;
  const double n = static_cast<double>(basis.n);
  std::vector<BlockNormRow> rows;
  auto compressed_norm = [&](const Mat& x, int i, int j) {
    Mat c = basis.basis[static_cast<size_t>(i)].transpose() * x * basis.basis[static_cast<size_t>(j)];
    return c.bdcSvd().singularValues()(0);
  };
  for (int i = 0; i <= d; ++i) {
    for (int j = 0; j <= d; ++j) {
      BlockNormRow re{i, j, "E", compressed_norm(s.e.a, i, j), "diag: lambda_i; off: 0", 0.0};
      rows.push_back(re);
      BlockNormRow rl{i, j, "L", compressed_norm(s.l.a, i, j), "", 0.0};
      if (i >= 2 && j >= 2) {
        rl.predicted_scale = "omega^2d * n^(d-1)";
        rl.predicted_value = std::pow(omega, 2 * d) * std::pow(n, d - 1);
      } else {
        rl.predicted_scale = "omega^2d * n^(d-1/2)";
        rl.predicted_value = std::pow(omega, 2 * d) * std::pow(n, d - 0.5);
      }
      rows.push_back(rl);
      BlockNormRow rd{i, j, "Delta", compressed_norm(s.delta.a, i, j),
                      "omega^(2d-min(i,j)) * n^(d-1/2) + omega^(2d-1) * n^(d-1)",
                      std::pow(omega, 2 * d - std::min(i, j)) * std::pow(n, d - 0.5) +
                          std::pow(omega, 2 * d - 1) * std::pow(n, d - 1)};
      rows.push_back(rd);
    }
  }
  return rows;
}

// --- e-matrix decomposition of Delta_q ---

struct DeltaDecompReport {
  int q = 0;
  double max_residual = 0.0;        // max |Delta_qK - approx| over entries
  double scale = 0.0;               // omega^(2d-q) n^(q-1)
  double max_residual_over_scale = 0.0;
  std::uint64_t entries_checked = 0;
};

namespace detail {

// shared case split of the e-matrices: 0 when s touches I u J or the
// intersection constraint fails; 2^k - 1 when the named pairs are all edges;
// -1 otherwise
inline double e_entry(const Graph& g, int s, std::span<const int> targets, int k, bool active) {
  if (!active) return 0.0;
  bool all = true;
  for (int v : targets) {
    if (!g.has_edge(s, v)) {
      all = false;
      break;
    }
  }
  return all ? std::exp2(static_cast<double>(k)) - 1.0 : -1.0;
}

}  // namespace detail

// Entrywise residual of the product approximation to Delta_{q,K} against its
// stated scale.
inline DeltaDecompReport delta_e_decomposition(const Graph& g, int d, double omega, int q) {
  if (q < 1 || q > d) throw std::invalid_argument("delta_e_decomposition: need 1 <= q <= d");
  const int n = g.size();
  if (binom(n, d) > 5000) throw std::invalid_argument("delta_e_decomposition: n too large");
  DeviationSplit s = split(g, d, omega);
  auto subs = all_subsets(n, d);
  const Eigen::Index N = static_cast<Eigen::Index>(subs.size());
  ScalarTable st = scalar_table(n, d, omega);
  DeltaDecompReport rep;
  rep.q = q;
  rep.scale = std::pow(omega, 2 * d - q) * std::pow(static_cast<double>(n), q - 1);

  const int u = 2 * d - q;
  const double eta = std::exp2(-2.0 * u + static_cast<double>(binom(u + 1, 2)) -
                               static_cast<double>(binom(2 * d, 2))) *
                     std::pow(static_cast<double>(n - u), 2 * d - u - 1) /
                     std::tgamma(static_cast<double>(2 * d - u));  // (2d-u-1)!
  const double beta_q = st.beta[static_cast<size_t>(q)];

  std::vector<int> K, IminusJ, JminusI;
  for (Eigen::Index r = 0; r < N; ++r) {
    const auto& I = subs[static_cast<size_t>(r)];
    for (Eigen::Index c = 0; c < N; ++c) {
      const auto& J = subs[static_cast<size_t>(c)];
      if (intersection_size(I, J) != q) continue;
      K.clear();
      for (int v : I)
        if (std::find(J.begin(), J.end(), v) != J.end()) K.push_back(v);
      IminusJ = sorted_difference(I, K);
      JminusI = sorted_difference(J, K);
      auto un = sorted_union(I, J);
      // E_ext(I,J) reduces to the cross pairs between I\J and J\I
      bool ext_in = true;
      for (int a : IminusJ)
        for (int b : JminusI)
          if (!g.has_edge(a, b)) ext_in = false;
      double e12 = ext_in ? std::exp2(static_cast<double>(2 * d - q)) - 1.0 : -1.0;
      double ssum = 0.0;
      for (int sv = 0; sv < n; ++sv) {
        bool active = std::find(un.begin(), un.end(), sv) == un.end();
        if (!active) continue;
        double e1 = detail::e_entry(g, sv, IminusJ, d - q, true);
        double e2 = detail::e_entry(g, sv, JminusI, d - q, true);
        double e3 = detail::e_entry(g, sv, K, q, true);
        ssum += (1.0 + e1) * (1.0 + e2) * (1.0 + e3) - 1.0;
      }
      double approx = eta * beta_q * (1.0 + e12) * ssum;
      double resid = std::abs(s.delta.a(r, c) - approx);
      rep.max_residual = std::max(rep.max_residual, resid);
      ++rep.entries_checked;
    }
  }
  rep.max_residual_over_scale = rep.max_residual / rep.scale;
  return rep;
}

}  // namespace pcm
