#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "pcm/combinatorics.hpp"
#include "pcm/eig.hpp"
#include "pcm/graph.hpp"
#include "pcm/matrix.hpp"
#include "pcm/parallel.hpp"

namespace pcm {

enum class Variant { mpw, corrected };

inline std::string variant_name(Variant v) { return v == Variant::mpw ? "mpw" : "corrected"; }

// beta(i) = C(omega,2d-i)/C(2d,2d-i)
// alpha(i) = beta(i) * C(n-2d+i, i) * 2^(-d^2 - C(i,2))
// p(i) = 2^(-(d-i)^2)
struct ScalarTable {
  int n = 0, d = 0;
  double omega = 0;
  std::vector<double> beta, alpha, p;
};

inline ScalarTable scalar_table(int n, int d, double omega) {
  if (omega < 2 * d || omega > n) throw std::invalid_argument("scalar_table: need 2d <= omega <= n");
  ScalarTable t;
  t.n = n;
  t.d = d;
  t.omega = omega;
  for (int i = 0; i <= d; ++i) {
    double b = binom_real(omega, 2 * d - i) / static_cast<double>(binom(2 * d, 2 * d - i));
    double a = b * static_cast<double>(binom(n - 2 * d + i, i)) *
               std::exp2(-static_cast<double>(d) * d - static_cast<double>(binom(i, 2)));
    t.beta.push_back(b);
    t.alpha.push_back(a);
    t.p.push_back(std::exp2(-static_cast<double>((d - i)) * (d - i)));
  }
  return t;
}

// Values of a degree-2d pseudo-expectation on multilinear monomials, stored
// per subset size; absent keys are zero.
struct PseudoExpectation {
  int n = 0, d = 0;  // half degree; operator degree is 2d
  double omega = 0;
  double omega_eff = 0;  // omega for mpw, omega' for corrected
  double gamma = 0;
  Variant variant = Variant::mpw;
  std::uint64_t clique_count = 0;  // C_{2d}(G)
  std::vector<std::unordered_map<std::uint64_t, double>> values;  // by |S|
  long long negative_count = 0;

  double value(std::span<const int> sorted_subset) const {
    size_t k = sorted_subset.size();
    if (k >= values.size()) return 0.0;
    auto it = values[k].find(subset_key(sorted_subset));
    return it == values[k].end() ? 0.0 : it->second;
  }

  void set(std::span<const int> sorted_subset, double v) {
    values[sorted_subset.size()][subset_key(sorted_subset)] = v;
  }
};

// \tE[x_I] = deg_G(I)/C_2d * C(omega,|I|)/C(2d,|I|)
inline PseudoExpectation mpw_pseudoexpectation(const Graph& g, int d, double omega) {
  const int n = g.size();
  if (omega < 2 * d || omega > n)
    throw std::invalid_argument("mpw_pseudoexpectation: need 2d <= omega <= n");
  PseudoExpectation pe;
  pe.n = n;
  pe.d = d;
  pe.omega = omega;
  pe.omega_eff = omega;
  pe.variant = Variant::mpw;
  pe.values.resize(static_cast<size_t>(2 * d + 1));

  // accumulate deg_G(I) for every I contained in some 2d-clique
  std::vector<std::unordered_map<std::uint64_t, std::uint64_t>> deg(static_cast<size_t>(2 * d + 1));
  std::uint64_t c2d = 0;
  std::vector<int> sub;
  for_each_clique(g, 2 * d, [&](std::span<const int> t) {
    ++c2d;
    int m = static_cast<int>(t.size());
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
      sub.clear();
      for (int i = 0; i < m; ++i)
        if (mask & (1u << i)) sub.push_back(t[static_cast<size_t>(i)]);
      ++deg[sub.size()][subset_key(sub)];
    }
  });
  if (c2d == 0)
    throw std::domain_error("mpw_pseudoexpectation: graph has no clique of size 2d");
  pe.clique_count = c2d;
  pe.values[0][subset_key({})] = 1.0;
  for (int k = 1; k <= 2 * d; ++k) {
    double coeff = binom_real(omega, k) /
                   (static_cast<double>(binom(2 * d, k)) * static_cast<double>(c2d));
    for (const auto& [key, dg] : deg[static_cast<size_t>(k)])
      pe.values[static_cast<size_t>(k)][key] = coeff * static_cast<double>(dg);
  }
  return pe;
}

struct ConstraintReport {
  double max_recursion_violation = 0.0;  // relative
  double max_nonclique_value = 0.0;      // absolute
  std::uint64_t subsets_checked = 0;
  bool pass(double tol = 1e-8) const {
    return max_recursion_violation <= tol && max_nonclique_value <= tol;
  }
};

// sum_{l not in S} value(S u l) = (omega_eff - |S|) value(S) for |S| < 2d,
// and value(S) = 0 on non-cliques.
inline ConstraintReport verify_program_constraints(const PseudoExpectation& pe, const Graph& g) {
  ConstraintReport rep;
  const int n = pe.n;
  for (int k = 0; k < 2 * pe.d; ++k) {
    std::vector<int> s = first_subset(k);
    if (static_cast<std::uint64_t>(binom(n, k)) == 0) continue;
    do {
      ++rep.subsets_checked;
      bool cl = g.is_clique(s);
      double vs = pe.value(s);
      if (!cl && k >= 2) {
        rep.max_nonclique_value = std::max(rep.max_nonclique_value, std::abs(vs));
        continue;  // extensions are non-cliques too; identity is 0 = 0
      }
      double lhs = 0.0;
      std::vector<int> ext;
      for (int l = 0; l < n; ++l) {
        if (std::find(s.begin(), s.end(), l) != s.end()) continue;
        ext = sorted_union(s, std::vector<int>{l});
        lhs += pe.value(ext);
      }
      double rhs = (pe.omega_eff - static_cast<double>(k)) * vs;
      double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-30});
      rep.max_recursion_violation =
          std::max(rep.max_recursion_violation, std::abs(lhs - rhs) / scale);
    } while (next_subset(s, n));
  }
  // non-clique zeroes at the top degree too
  std::vector<int> s = first_subset(2 * pe.d);
  do {
    if (!g.is_clique(s))
      rep.max_nonclique_value = std::max(rep.max_nonclique_value, std::abs(pe.value(s)));
  } while (next_subset(s, n));
  return rep;
}

// M(I,J) = deg_G(I u J) C(omega,u)/C(2d,u) = C_2d * value(I u J)
inline IndexedMatrix moment_matrix(const PseudoExpectation& pe) {
  if (pe.variant != Variant::mpw)
    throw std::invalid_argument("moment_matrix: defined for the mpw variant");
  IndexedMatrix m = make_indexed(pe.n, pe.d, pe.d, true);
  auto subs = all_subsets(pe.n, pe.d);
  const Eigen::Index N = m.rows();
  const double c = static_cast<double>(pe.clique_count);
  parallel_for(0, N, [&](std::int64_t lo, std::int64_t hi, int) {
    for (std::int64_t i = lo; i < hi; ++i) {
      for (Eigen::Index j = i; j < N; ++j) {
        auto u = sorted_union(subs[static_cast<size_t>(i)], subs[static_cast<size_t>(j)]);
        double v = c * pe.value(u);
        m.a(i, j) = v;
        m.a(j, i) = v;
      }
    }
  });
  return m;
}

// M'(I,J) = beta(|I cap J|) #{T : |T|=2d, I u J subset T, E(T)\(E(I) u E(J)) in G}
inline IndexedMatrix filled_matrix(const Graph& g, int d, double omega) {
  const int n = g.size();
  ScalarTable st = scalar_table(n, d, omega);
  IndexedMatrix m = make_indexed(n, d, d, true);
  const int td = 2 * d;
  SubsetIndexer idx(n, d);

  // all d-subsets of positions [2d], paired with their position-pair masks
  std::vector<int> posmask_first = first_subset(d);
  struct Choice {
    std::uint32_t vmask;   // which positions of T
    std::uint32_t pmask;   // pairs of T inside the choice, indexed by pair rank within [2d]
  };
  std::vector<Choice> choices;
  {
    std::vector<int> c = first_subset(d);
    do {
      Choice ch{0, 0};
      for (int i = 0; i < d; ++i) ch.vmask |= 1u << c[static_cast<size_t>(i)];
      for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
          ch.pmask |= 1u << pair_index(c[static_cast<size_t>(i)], c[static_cast<size_t>(j)]);
      choices.push_back(ch);
    } while (next_subset(c, td));
  }

  const Eigen::Index N = m.rows();
  auto accumulate = [&](std::span<const int> t, Eigen::MatrixXd& acc) {
    // missing pairs of T as a position-pair mask
    std::uint32_t missing = 0;
    for (int i = 0; i < td; ++i)
      for (int j = i + 1; j < td; ++j)
        if (!g.has_edge(t[static_cast<size_t>(i)], t[static_cast<size_t>(j)]))
          missing |= 1u << pair_index(i, j);
    // ranks of the d-subsets of T
    std::vector<std::uint64_t> ranks(choices.size());
    std::vector<int> pick(static_cast<size_t>(d));
    for (size_t ci = 0; ci < choices.size(); ++ci) {
      int k = 0;
      for (int i = 0; i < td; ++i)
        if (choices[ci].vmask & (1u << i)) pick[static_cast<size_t>(k++)] = t[static_cast<size_t>(i)];
      ranks[ci] = idx.rank(pick);
    }
    for (size_t ci = 0; ci < choices.size(); ++ci) {
      for (size_t cj = 0; cj < choices.size(); ++cj) {
        if ((missing & ~(choices[ci].pmask | choices[cj].pmask)) != 0) continue;
        int inter = std::popcount(choices[ci].vmask & choices[cj].vmask);
        acc(static_cast<Eigen::Index>(ranks[ci]), static_cast<Eigen::Index>(ranks[cj])) +=
            st.beta[static_cast<size_t>(inter)];
      }
    }
  };

  // per-thread partials merged in block order when the matrix is small enough
  const std::uint64_t tcount = binom(n, td);
  bool parallel_ok = N <= 3000 && thread_count() > 1 && tcount > 200000;
  if (!parallel_ok) {
    std::vector<int> t = first_subset(td);
    do {
      accumulate(t, m.a);
    } while (next_subset(t, n));
  } else {
    int workers = thread_count();
    std::vector<Eigen::MatrixXd> partial(static_cast<size_t>(workers));
    SubsetIndexer tidx(n, td);
    parallel_for(0, static_cast<std::int64_t>(tcount), [&](std::int64_t lo, std::int64_t hi, int w) {
      auto& acc = partial[static_cast<size_t>(w)];
      acc = Eigen::MatrixXd::Zero(N, N);
      std::vector<int> t;
      tidx.unrank(static_cast<std::uint64_t>(lo), t);
      for (std::int64_t k = lo; k < hi; ++k) {
        accumulate(t, acc);
        if (k + 1 < hi) next_subset(t, n);
      }
    });
    for (auto& p : partial)
      if (p.size() > 0) m.a += p;
  }
  return m;
}

struct MinEigReport {
  double value = 0.0;
  double residual = 0.0;
  bool certified = false;
  bool is_psd = false;
};

inline MinEigReport min_eig(const IndexedMatrix& m, double psd_rel_tol = 1e-8,
                            Eigen::Index dense_limit = 2000) {
  SpectrumEstimate est = min_eig_sym(m.a, dense_limit);
  MinEigReport rep;
  rep.value = est.value;
  rep.residual = est.residual;
  rep.certified = est.certified;
  rep.is_psd = est.value >= -psd_rel_tol * m.a.norm();
  return rep;
}

}  // namespace pcm
