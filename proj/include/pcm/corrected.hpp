#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pcm/eig.hpp"
#include "pcm/graph.hpp"
#include "pcm/johnson.hpp"
#include "pcm/moments.hpp"

namespace pcm {

// gamma (omega/n)^5 sum_s r_s(i) r_s(j) r_s(k) r_s(l) on 4-cliques, else 0
inline double correction_value(const Graph& g, int i, int j, int k, int l, double gamma,
                               double omega) {
  std::vector<int> q{i, j, k, l};
  std::sort(q.begin(), q.end());
  if (q[0] == q[1] || q[1] == q[2] || q[2] == q[3])
    throw std::invalid_argument("correction_value: indices must be distinct");
  for (int v : q) g.check_vertex(v);
  if (!g.is_clique(q)) return 0.0;
  double sum = 0.0;
  for (int s = 0; s < g.size(); ++s) {
    sum += static_cast<double>(g.edge_sign(s, i)) * g.edge_sign(s, j) * g.edge_sign(s, k) *
           g.edge_sign(s, l);
  }
  double t = omega / static_cast<double>(g.size());
  return gamma * t * t * t * t * t * sum;
}

// Newton solve of C(x,4) = C(omega,4) + c with the falling-factorial quartic.
// The quartic is monotone for x > 3.5; the guard rejects targets that push
// the root off that branch.
inline double solve_omega_prime(double omega, double c) {
  if (omega <= 4.0) throw std::invalid_argument("solve_omega_prime: need omega > 4");
  double target = binom_real(omega, 4) + c;
  if (target <= binom_real(3.6, 4))
    throw std::domain_error("solve_omega_prime: correction too large, bracket failed (c = " +
                            std::to_string(c) + ")");
  double x = omega;
  for (int it = 0; it < 200; ++it) {
    double fx = binom_real(x, 4) - target;
    if (std::abs(fx) <= 1e-13 * std::max(1.0, std::abs(target))) return x;
    // d/dx [x(x-1)(x-2)(x-3)]/24
    double dfx = (4 * x * x * x - 18 * x * x + 22 * x - 6) / 24.0;
    if (dfx <= 0) throw std::domain_error("solve_omega_prime: left the monotone branch");
    double step = fx / dfx;
    x -= step;
    if (x < 3.6) x = 3.6;
  }
  throw std::domain_error("solve_omega_prime: Newton failed to converge");
}

struct CorrectionParams {
  double gamma = 0;
  double omega = 0;
  double c = 0;        // total correction over 4-cliques
  double omega_prime = 0;
};

// Corrected degree-4 moments: MPW plus the correction on 4-cliques, pushed to
// lower degrees through the sum constraint at omega'.
inline PseudoExpectation corrected_pseudoexpectation(const Graph& g, double omega, double gamma) {
  const int n = g.size();
  const int d = 2;
  PseudoExpectation base = mpw_pseudoexpectation(g, d, omega);

  PseudoExpectation pe;
  pe.n = n;
  pe.d = d;
  pe.omega = omega;
  pe.gamma = gamma;
  pe.variant = Variant::corrected;
  pe.clique_count = base.clique_count;
  pe.values.resize(5);
  pe.values[0][subset_key({})] = 1.0;

  // precompute row sums of r products per 4-clique
  const double t5 = std::pow(omega / static_cast<double>(n), 5);
  double c_total = 0.0;
  for_each_clique(g, 4, [&](std::span<const int> s) {
    double sum = 0.0;
    for (int v = 0; v < n; ++v) {
      sum += static_cast<double>(g.edge_sign(v, s[0])) * g.edge_sign(v, s[1]) *
             g.edge_sign(v, s[2]) * g.edge_sign(v, s[3]);
    }
    double corr = gamma * t5 * sum;
    c_total += corr;
    double v4 = base.value(s) + corr;
    pe.set(s, v4);
    if (v4 < 0) ++pe.negative_count;
  });
  double omega_prime = gamma == 0.0 ? omega : solve_omega_prime(omega, c_total);
  pe.omega_eff = omega_prime;

  // downward recursion: value(S) = sum_{l not in S} value(S u l) / (omega' - |S|)
  for (int k = 3; k >= 1; --k) {
    double div = omega_prime - static_cast<double>(k);
    std::vector<int> sub(static_cast<size_t>(k));
    for (const auto& [key, val] : pe.values[static_cast<size_t>(k + 1)]) {
      // distribute each (k+1)-value into its k-subsets
      std::vector<int> s = decode_subset_key(key);
      int m = static_cast<int>(s.size());
      for (int drop = 0; drop < m; ++drop) {
        int w = 0;
        for (int i = 0; i < m; ++i)
          if (i != drop) sub[static_cast<size_t>(w++)] = s[static_cast<size_t>(i)];
        pe.values[static_cast<size_t>(k)][subset_key(sub)] += val / div;
      }
    }
    for (const auto& [key, val] : pe.values[static_cast<size_t>(k)])
      if (val < 0) ++pe.negative_count;
  }
  return pe;
}

inline CorrectionParams correction_params(const PseudoExpectation& pe) {
  CorrectionParams p;
  p.gamma = pe.gamma;
  p.omega = pe.omega;
  p.omega_prime = pe.omega_eff;
  p.c = binom_real(pe.omega_eff, 4) - binom_real(pe.omega, 4);
  return p;
}

// N'(I,J) = value(I u J) over 2-subsets
inline IndexedMatrix build_Nprime(const PseudoExpectation& pe) {
  if (pe.d != 2) throw std::invalid_argument("build_Nprime: defined at d = 2");
  IndexedMatrix m = make_indexed(pe.n, 2, 2, true);
  auto subs = all_subsets(pe.n, 2);
  const Eigen::Index N = m.rows();
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = i; j < N; ++j) {
      auto u = sorted_union(subs[static_cast<size_t>(i)], subs[static_cast<size_t>(j)]);
      double v = pe.value(u);
      m.a(i, j) = v;
      m.a(j, i) = v;
    }
  }
  return m;
}

// R(I,J) = gamma (omega/n)^5 C_4 sum_s prod_{a in I u J} r_s(a) when
// |I u J| = 4 and the external pairs are all edges, else 0.
inline IndexedMatrix build_R(const Graph& g, double omega, double gamma) {
  const int n = g.size();
  const double c4 = static_cast<double>(count_cliques(g, 4));
  const double pref = gamma * std::pow(omega / static_cast<double>(n), 5) * c4;
  IndexedMatrix m = make_indexed(n, 2, 2, true);
  auto subs = all_subsets(n, 2);
  const Eigen::Index N = m.rows();
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto& I = subs[static_cast<size_t>(i)];
    for (Eigen::Index j = i; j < N; ++j) {
      const auto& J = subs[static_cast<size_t>(j)];
      if (intersection_size(I, J) != 0) continue;
      bool ext = g.has_edge(I[0], J[0]) && g.has_edge(I[0], J[1]) && g.has_edge(I[1], J[0]) &&
                 g.has_edge(I[1], J[1]);
      if (!ext) continue;
      double sum = 0.0;
      for (int s = 0; s < n; ++s)
        sum += static_cast<double>(g.edge_sign(s, I[0])) * g.edge_sign(s, I[1]) *
               g.edge_sign(s, J[0]) * g.edge_sign(s, J[1]);
      m.a(i, j) = pref * sum;
      m.a(j, i) = m.a(i, j);
    }
  }
  return m;
}

// Rtilde0(I,J) = (1/16) gamma (omega/n)^5 C_4 sum_s prod_{a in (IuJ)\(IcapJ)} r_s(a),
// every entry unconditionally.
inline IndexedMatrix build_Rtilde0(const Graph& g, double omega, double gamma) {
  const int n = g.size();
  const double c4 = static_cast<double>(count_cliques(g, 4));
  const double pref = gamma * std::pow(omega / static_cast<double>(n), 5) * c4 / 16.0;
  IndexedMatrix m = make_indexed(n, 2, 2, true);
  auto subs = all_subsets(n, 2);
  const Eigen::Index N = m.rows();
  std::vector<int> symdiff;
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto& I = subs[static_cast<size_t>(i)];
    for (Eigen::Index j = i; j < N; ++j) {
      const auto& J = subs[static_cast<size_t>(j)];
      symdiff.clear();
      for (int v : I)
        if (std::find(J.begin(), J.end(), v) == J.end()) symdiff.push_back(v);
      for (int v : J)
        if (std::find(I.begin(), I.end(), v) == I.end()) symdiff.push_back(v);
      double sum = 0.0;
      for (int s = 0; s < n; ++s) {
        double prod = 1.0;
        for (int v : symdiff) prod *= g.edge_sign(s, v);
        sum += prod;
      }
      m.a(i, j) = pref * sum;
      m.a(j, i) = m.a(i, j);
    }
  }
  return m;
}

// W-space refinement of the Johnson decomposition at d = 2:
// W_0 = V_0, W_1 = V_1, W_1.5 completes V_0 + V_1 to the span including the
// tensored neighborhood vectors, W_2 is the global complement.
struct WBasis {
  Mat w0, w1, w15, w2;  // orthonormal column bases
  int dim_w15 = 0;
  bool rank_deficient = false;

  Mat projector(const Mat& b) const { return b * b.transpose(); }
};

inline WBasis w_decomposition(const SymBasis& basis, const Graph& g) {
  if (basis.d != 2) throw std::invalid_argument("w_decomposition: needs a d = 2 basis");
  const int n = g.size();
  const Eigen::Index N = static_cast<Eigen::Index>(binom(n, 2));
  WBasis wb;
  wb.w0 = basis.basis[0];
  wb.w1 = basis.basis[1];
  // orthonormalize the tensored neighborhood vectors against V_0 + V_1
  Mat cand(N, n);
  auto subs = all_subsets(n, 2);
  for (int s = 0; s < n; ++s) {
    for (Eigen::Index r = 0; r < N; ++r) {
      const auto& I = subs[static_cast<size_t>(r)];
      cand(r, s) = static_cast<double>(g.edge_sign(s, I[0])) * g.edge_sign(s, I[1]);
    }
  }
  Mat q(N, wb.w0.cols() + wb.w1.cols() + n);
  q.leftCols(wb.w0.cols()) = wb.w0;
  q.middleCols(wb.w0.cols(), wb.w1.cols()) = wb.w1;
  Eigen::Index fixed = wb.w0.cols() + wb.w1.cols();
  int added = mgs_extend(q, fixed, cand);
  wb.w15 = q.middleCols(fixed, added);
  wb.dim_w15 = added;
  wb.rank_deficient = added < n;
  // W_2: complement within V_2
  const Mat& v2 = basis.basis[2];
  Mat v2_residual = v2 - wb.w15 * (wb.w15.transpose() * v2);
  Mat q2(N, fixed + added + v2.cols());
  q2.leftCols(fixed) = q.leftCols(fixed);
  q2.middleCols(fixed, added) = wb.w15;
  int w2dim = mgs_extend(q2, fixed + added, v2_residual);
  wb.w2 = q2.middleCols(fixed + added, w2dim);
  return wb;
}

struct GramBoundReport {
  double min_eig = 0.0;        // smallest eigenvalue of S^T S
  double min_over_n2 = 0.0;
  double centered_norm_over_n2 = 0.0;  // ||S^T S - C(n,2) I|| / n^2
  double diagonal = 0.0;               // common diagonal value of S^T S
};

// Gram matrix of the tensored neighborhood vectors.
inline GramBoundReport correction_gram_bound(const Graph& g) {
  const int n = g.size();
  Mat gram(n, n);
  for (int s = 0; s < n; ++s) {
    for (int t = s; t < n; ++t) {
      // sum over pairs {i<j} of r_s(i)r_s(j)r_t(i)r_t(j)
      double dot = 0.0, sq = 0.0;
      for (int i = 0; i < n; ++i) {
        double a = static_cast<double>(g.edge_sign(s, i)) * g.edge_sign(t, i);
        dot += a;
        sq += a * a;
      }
      double v = 0.5 * (dot * dot - sq);
      gram(s, t) = v;
      gram(t, s) = v;
    }
  }
  GramBoundReport rep;
  rep.diagonal = gram(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> es(gram, Eigen::EigenvaluesOnly);
  rep.min_eig = es.eigenvalues()(0);
  rep.min_over_n2 = rep.min_eig / (static_cast<double>(n) * n);
  Mat centered = gram - static_cast<double>(binom(n, 2)) * Mat::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Mat> es2(centered, Eigen::EigenvaluesOnly);
  double nrm = std::max(std::abs(es2.eigenvalues()(0)),
                        std::abs(es2.eigenvalues()(n - 1)));
  rep.centered_norm_over_n2 = nrm / (static_cast<double>(n) * n);
  return rep;
}

struct ScalarConcentrationReport {
  // quantity (1): full correction sum; (2): per-triple sums; (3): per-(i,j,s) sums
  std::vector<double> q1_ratio;  // |value| / (n^{5/2} log^2 n) per trial
  std::vector<double> q2_ratio;  // max over sampled triples / (n log n)
  std::vector<double> q3_ratio;  // max over sampled (i,j,s) / sqrt(n log n)
  double c1 = 0, c2 = 0, c3 = 0;       // fitted constants
  double exceed1 = 0, exceed2 = 0, exceed3 = 0;
  bool deterministic_input = false;
};

inline double scalar_quantity_one(const Graph& g) {
  double total = 0.0;
  const int n = g.size();
  for_each_clique(g, 4, [&](std::span<const int> s) {
    for (int v = 0; v < n; ++v)
      total += static_cast<double>(g.edge_sign(v, s[0])) * g.edge_sign(v, s[1]) *
               g.edge_sign(v, s[2]) * g.edge_sign(v, s[3]);
  });
  return total;
}

inline ScalarConcentrationReport scalar_concentration_checks(int n, int trials,
                                                             std::uint64_t seed_base,
                                                             int samples_per_trial = 60) {
  ScalarConcentrationReport rep;
  const double logn = std::log(static_cast<double>(n));
  const double s1 = std::pow(static_cast<double>(n), 2.5) * logn * logn;
  const double s2 = static_cast<double>(n) * logn;
  const double s3 = std::sqrt(static_cast<double>(n) * logn);
  for (int t = 0; t < trials; ++t) {
    Graph g = sample_gnp(n, seed_base + static_cast<std::uint64_t>(t));
    rep.q1_ratio.push_back(std::abs(scalar_quantity_one(g)) / s1);

    SplitMixStream rng(seed_base * 7919 + static_cast<std::uint64_t>(t));
    double worst2 = 0.0, worst3 = 0.0;
    for (int m = 0; m < samples_per_trial; ++m) {
      int i = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
      int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
      int k = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
      int s = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
      if (i == j || j == k || i == k) continue;
      // (2): sum over s and over l completing a 4-clique with i,j,k
      std::vector<int> trip{i, j, k};
      std::sort(trip.begin(), trip.end());
      if (g.is_clique(trip)) {
        double sum2 = 0.0;
        for (int l : common_neighbors(g, trip)) {
          for (int sv = 0; sv < n; ++sv)
            sum2 += static_cast<double>(g.edge_sign(sv, i)) * g.edge_sign(sv, j) *
                    g.edge_sign(sv, k) * g.edge_sign(sv, l);
        }
        worst2 = std::max(worst2, std::abs(sum2));
      }
      // (3): sum over k' in a triangle with i,j of r_s(i) r_s(k')
      if (s != i && s != j && i != j && g.has_edge(i, j)) {
        std::vector<int> pairij{std::min(i, j), std::max(i, j)};
        double sum3 = 0.0;
        for (int kp : common_neighbors(g, pairij))
          sum3 += static_cast<double>(g.edge_sign(s, i)) * g.edge_sign(s, kp);
        worst3 = std::max(worst3, std::abs(sum3));
      }
    }
    rep.q2_ratio.push_back(worst2 / s2);
    rep.q3_ratio.push_back(worst3 / s3);
  }
  // constants fitted on the first fifth of the trials, exceedance on the rest
  int calib = std::max(1, trials / 5);
  auto fit_and_count = [&](const std::vector<double>& r, double& c, double& exceed) {
    c = 0.0;
    for (int t = 0; t < calib; ++t) c = std::max(c, r[static_cast<size_t>(t)]);
    c *= 1.5;
    if (c == 0.0) c = 1.0;
    int over = 0, counted = 0;
    for (size_t t = static_cast<size_t>(calib); t < r.size(); ++t) {
      ++counted;
      if (r[t] > c) ++over;
    }
    exceed = counted ? static_cast<double>(over) / counted : 0.0;
  };
  fit_and_count(rep.q1_ratio, rep.c1, rep.exceed1);
  fit_and_count(rep.q2_ratio, rep.c2, rep.exceed2);
  fit_and_count(rep.q3_ratio, rep.c3, rep.exceed3);
  return rep;
}

}  // namespace pcm
