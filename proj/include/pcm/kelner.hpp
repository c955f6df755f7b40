#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pcm/corrected.hpp"
#include "pcm/graph.hpp"
#include "pcm/moments.hpp"

namespace pcm {

// |sum_{J >= I, |J| = |I|+m} value(J) - C(omega_eff - |I|, m) value(I)|, relative
inline double moment_recursion_check(const PseudoExpectation& pe, std::span<const int> I, int m) {
  const int k = static_cast<int>(I.size());
  if (k + m > 2 * pe.d) throw std::invalid_argument("moment_recursion_check: |I| + m > 2d");
  double lhs = 0.0;
  for (const auto& [key, val] : pe.values[static_cast<size_t>(k + m)]) {
    std::vector<int> J = decode_subset_key(key);
    if (std::includes(J.begin(), J.end(), I.begin(), I.end())) lhs += val;
  }
  double rhs = binom_real(pe.omega_eff - static_cast<double>(k), m) * pe.value(I);
  double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-30});
  return std::abs(lhs - rhs) / scale;
}

// Default scaling constant: centers the cross term of the expansion.
inline double default_refutation_scale(double omega, int d) {
  return binom_real(omega - d, d) / std::pow(omega, d);
}

struct RefutationResult {
  int s = 0;
  double scale_c = 0.0;
  double value = 0.0;            // expansion value
  double term_square = 0.0;      // C^2 w^2d * value({s})
  double term_cross = 0.0;       // -2C w^d C(w-1,d) * value({s})
  double term_sum = 0.0;         // expansion of the squared sum
  double quadratic_form = 0.0;   // independent evaluation against the moments
  double agreement_rel = 0.0;
  bool paths_agree = true;
};

// pe[(C w^d x_s - sum_{|I|=d, s not in I} prod_i r_s(i) x_I)^2], evaluated two
// independent ways: the recursion-based expansion and the raw quadratic form.
inline RefutationResult refutation_value(const Graph& g, const PseudoExpectation& pe, int s,
                                         std::optional<double> scale_c = std::nullopt,
                                         double agree_tol = 1e-8) {
  if (pe.variant != Variant::mpw)
    throw std::invalid_argument("refutation_value: pe must be the mpw variant");
  g.check_vertex(s);
  const int d = pe.d;
  const double omega = pe.omega;
  const double C = scale_c.value_or(default_refutation_scale(omega, d));
  auto rs = neighborhood_vector(g, s);

  RefutationResult res;
  res.s = s;
  res.scale_c = C;

  std::vector<int> sv{s};
  double vs = pe.value(sv);
  res.term_square = C * C * std::pow(omega, 2 * d) * vs;
  res.term_cross = -2.0 * C * std::pow(omega, d) * binom_real(omega - 1, d) * vs;

  // sum over K = I symdiff J grouped by |K| = 2x; the recursion collapses the
  // inner sum over unions, with the supersets through s removed explicitly
  double t3 = 0.0;
  for (int x = 0; x <= d; ++x) {
    const size_t kk = static_cast<size_t>(2 * x);
    double pairs = static_cast<double>(binom(2 * x, x));
    double coeff_all = binom_real(omega - 2 * x, d - x);
    double coeff_s = binom_real(omega - 2 * x - 1, d - x - 1);
    if (x == 0) {
      // K = {} contributes once
      double prod = 1.0;
      double with_s = pe.value(sv);
      t3 += pairs * prod * (coeff_all * 1.0 - coeff_s * with_s);
      continue;
    }
    for (const auto& [key, val] : pe.values[kk]) {
      std::vector<int> K = decode_subset_key(key);
      if (std::find(K.begin(), K.end(), s) != K.end()) continue;
      double prod = 1.0;
      for (int v : K) prod *= rs.values[static_cast<size_t>(v)];
      double with_s = (2 * x + 1 <= 2 * pe.d) ? pe.value(sorted_union(K, sv)) : 0.0;
      t3 += pairs * prod * (coeff_all * val - coeff_s * with_s);
    }
  }
  res.term_sum = t3;
  res.value = res.term_square + res.term_cross + res.term_sum;

  // independent path: expand the square against the moment values directly
  struct Term {
    std::vector<int> monomial;
    double coeff;
  };
  std::vector<Term> terms;
  terms.push_back({sv, C * std::pow(omega, d)});
  for (const auto& [key, val] : pe.values[static_cast<size_t>(d)]) {
    (void)val;
    std::vector<int> I = decode_subset_key(key);
    if (std::find(I.begin(), I.end(), s) != I.end()) continue;
    double prod = 1.0;
    for (int v : I) prod *= rs.values[static_cast<size_t>(v)];
    terms.push_back({std::move(I), -prod});
  }
  double qf = 0.0;
  for (size_t a = 0; a < terms.size(); ++a) {
    for (size_t b = 0; b < terms.size(); ++b) {
      auto u = sorted_union(terms[a].monomial, terms[b].monomial);
      qf += terms[a].coeff * terms[b].coeff * pe.value(u);
    }
  }
  res.quadratic_form = qf;
  double sc = std::max({std::abs(res.value), std::abs(qf), 1e-30});
  res.agreement_rel = std::abs(res.value - qf) / sc;
  res.paths_agree = res.agreement_rel <= agree_tol;
  return res;
}

struct DiscrepancyResult {
  double value = 0.0;            // pe[sum_i r_i(x)^4]
  double per_vertex_mean = 0.0;
  double reference = 0.0;        // omega^5 / 2, the true-distribution floor
};

// Multilinearizes sum_i r_i(x)^4 under x_j^2 = x_j and evaluates it.
inline DiscrepancyResult deg4_discrepancy(const Graph& g, const PseudoExpectation& pe) {
  if (pe.d != 2) throw std::invalid_argument("deg4_discrepancy: needs a degree-4 operator");
  const int n = g.size();
  double total = 0.0;
  double singles_all = 0.0;
  for (const auto& [key, val] : pe.values[1]) singles_all += val;
  for (int i = 0; i < n; ++i) {
    auto ri = neighborhood_vector(g, i);
    std::vector<int> iv{i};
    double acc = singles_all - pe.value(iv);
    for (const auto& [key, val] : pe.values[2]) {
      std::vector<int> p = decode_subset_key(key);
      if (p[0] == i || p[1] == i) continue;
      double rj = ri.values[static_cast<size_t>(p[0])];
      double rk = ri.values[static_cast<size_t>(p[1])];
      acc += (6.0 + 8.0 * rj * rk) * val;
    }
    for (const auto& [key, val] : pe.values[3]) {
      std::vector<int> t = decode_subset_key(key);
      if (t[0] == i || t[1] == i || t[2] == i) continue;
      double ra = ri.values[static_cast<size_t>(t[0])];
      double rb = ri.values[static_cast<size_t>(t[1])];
      double rc = ri.values[static_cast<size_t>(t[2])];
      acc += 12.0 * (ra * rb + ra * rc + rb * rc) * val;
    }
    for (const auto& [key, val] : pe.values[4]) {
      std::vector<int> q = decode_subset_key(key);
      if (q[0] == i || q[1] == i || q[2] == i || q[3] == i) continue;
      double prod = ri.values[static_cast<size_t>(q[0])] * ri.values[static_cast<size_t>(q[1])] *
                    ri.values[static_cast<size_t>(q[2])] * ri.values[static_cast<size_t>(q[3])];
      acc += 24.0 * prod * val;
    }
    total += acc;
  }
  DiscrepancyResult res;
  res.value = total;
  res.per_vertex_mean = total / static_cast<double>(n);
  res.reference = 0.5 * std::pow(pe.omega, 5);
  return res;
}

struct SweepRow {
  double omega = 0.0;
  double psd_fraction = 0.0;
  double negative_refutation_fraction = 0.0;
  double median_min_eig = 0.0;
  int valid_seeds = 0;
  bool skipped = false;  // omega below 2d
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double crossover = std::numeric_limits<double>::quiet_NaN();  // PSD fraction drops below 1/2
  bool monotone_up_to_noise = true;
};

struct SweepCellRecord {
  double omega = 0.0;
  std::uint64_t seed = 0;
  double min_eig = 0.0;
  double residual = 0.0;
  bool is_psd = false;
  double refutation = std::numeric_limits<double>::quiet_NaN();
};

// The PSD column tracks the moment matrix itself (M for mpw, N' for
// corrected); at desk-scale n the filled M' never turns PSD for any
// admissible omega >= 2d, which would leave the crossover undefined.
inline SweepResult threshold_sweep(int n, int d, std::span<const double> omega_grid, int seeds,
                                   std::uint64_t seed_base, Variant variant, double gamma,
                                   std::vector<SweepCellRecord>* cells = nullptr,
                                   bool use_filled = false) {
  SweepResult out;
  if (!std::is_sorted(omega_grid.begin(), omega_grid.end()))
    throw std::invalid_argument("threshold_sweep: grid must be ascending");
  for (double omega : omega_grid) {
    SweepRow row;
    row.omega = omega;
    if (omega < 2 * d || omega > n) {
      row.skipped = true;
      out.rows.push_back(row);
      continue;
    }
    std::vector<double> eigs;
    int psd = 0, neg = 0;
    for (int t = 0; t < seeds; ++t) {
      std::uint64_t seed = seed_base + static_cast<std::uint64_t>(t);
      Graph g = sample_gnp(n, seed);
      SweepCellRecord cell;
      cell.omega = omega;
      cell.seed = seed;
      if (variant == Variant::mpw) {
        PseudoExpectation pe = mpw_pseudoexpectation(g, d, omega);
        IndexedMatrix m = use_filled ? filled_matrix(g, d, omega) : moment_matrix(pe);
        MinEigReport me = min_eig(m);
        cell.min_eig = me.value;
        cell.residual = me.residual;
        cell.is_psd = me.is_psd;
        cell.refutation = refutation_value(g, pe, 0).value;
      } else {
        PseudoExpectation pe = corrected_pseudoexpectation(g, omega, gamma);
        IndexedMatrix np = build_Nprime(pe);
        MinEigReport me = min_eig(np);
        cell.min_eig = me.value;
        cell.residual = me.residual;
        cell.is_psd = me.is_psd;
      }
      eigs.push_back(cell.min_eig);
      if (cell.is_psd) ++psd;
      if (cell.refutation < 0) ++neg;
      if (cells) cells->push_back(cell);
    }
    std::sort(eigs.begin(), eigs.end());
    row.valid_seeds = seeds;
    row.psd_fraction = static_cast<double>(psd) / seeds;
    row.negative_refutation_fraction = static_cast<double>(neg) / seeds;
    row.median_min_eig = eigs[eigs.size() / 2];
    out.rows.push_back(row);
  }
  // crossover where the PSD fraction first drops below 1/2
  double prev_omega = 0, prev_frac = -1;
  double last_frac = -1;
  for (const auto& row : out.rows) {
    if (row.skipped) continue;
    if (last_frac >= 0 && row.psd_fraction > last_frac + 0.2) out.monotone_up_to_noise = false;
    last_frac = row.psd_fraction;
    if (prev_frac >= 0.5 && row.psd_fraction < 0.5) {
      double run = prev_frac - row.psd_fraction;
      out.crossover = run > 0
                          ? prev_omega + (prev_frac - 0.5) * (row.omega - prev_omega) / run
                          : row.omega;
      break;
    }
    if (std::isnan(out.crossover) && prev_frac < 0 && row.psd_fraction < 0.5) {
      out.crossover = row.omega;  // already below 1/2 at the low end
      break;
    }
    prev_omega = row.omega;
    prev_frac = row.psd_fraction;
  }
  return out;
}

}  // namespace pcm
