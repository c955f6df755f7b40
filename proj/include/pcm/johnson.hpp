#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcm/combinatorics.hpp"
#include "pcm/eig.hpp"
#include "pcm/matrix.hpp"

namespace pcm {

// Orthonormal bases for the common eigenspaces V_0..V_d of the set-symmetric
// algebra over d-subsets.  V_t completes the span of the indicator-sum
// vectors of t-subsets against everything accumulated at smaller t.
struct SymBasis {
  int n = 0, d = 0;
  std::vector<Mat> basis;  // basis[t]: C(n,d) x dim_t, orthonormal columns
  std::vector<int> dims;

  Eigen::Index total_dim() const {
    Eigen::Index s = 0;
    for (const auto& b : basis) s += b.cols();
    return s;
  }

  Mat projector(int t) const { return basis[static_cast<size_t>(t)] * basis[static_cast<size_t>(t)].transpose(); }
};

// Modified Gram-Schmidt with a re-orthogonalization pass; returns how many
// candidate columns were accepted into q (appended after `fixed` columns).
inline int mgs_extend(Mat& q, Eigen::Index fixed, const Mat& candidates, double drop_tol = 1e-8) {
  Eigen::Index accepted = fixed;
  for (Eigen::Index c = 0; c < candidates.cols(); ++c) {
    Vec v = candidates.col(c);
    double orig = v.norm();
    if (orig == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < accepted; ++j) v -= q.col(j).dot(v) * q.col(j);
    }
    double nrm = v.norm();
    if (nrm > drop_tol * orig) {
      q.col(accepted) = v / nrm;
      ++accepted;
    }
  }
  return static_cast<int>(accepted - fixed);
}

inline SymBasis build_projectors(int n, int d) {
  if (2 * d > n) throw std::invalid_argument("build_projectors: need d <= n/2");
  SymBasis sb;
  sb.n = n;
  sb.d = d;
  const Eigen::Index N = static_cast<Eigen::Index>(binom(n, d));
  auto subs = all_subsets(n, d);
  Mat q(N, N);
  Eigen::Index filled = 0;
  for (int t = 0; t <= d; ++t) {
    const Eigen::Index cols = static_cast<Eigen::Index>(binom(n, t));
    Mat cand = Mat::Zero(N, cols);
    SubsetIndexer small(n, t);
    std::vector<int> pick(static_cast<size_t>(t));
    for (Eigen::Index r = 0; r < N; ++r) {
      const auto& I = subs[static_cast<size_t>(r)];
      // every t-subset I' of I contributes the row to column I'
      std::vector<int> mask = first_subset(t);
      if (t == 0) {
        cand(r, 0) += 1.0;
        continue;
      }
      do {
        for (int i = 0; i < t; ++i) pick[static_cast<size_t>(i)] = I[static_cast<size_t>(mask[static_cast<size_t>(i)])];
        cand(r, static_cast<Eigen::Index>(small.rank(pick))) += 1.0;
      } while (next_subset(mask, d));
    }
    int added = mgs_extend(q, filled, cand);
    sb.basis.push_back(q.middleCols(filled, added));
    sb.dims.push_back(added);
    filled += added;
  }
  return sb;
}

// E(I,J) = C(n-u, 2d-u) * C(omega,u)/C(2d,u) * 2^(-d^2 - C(t,2)),
// u = |I cup J|, t = |I cap J|
inline IndexedMatrix expectation_matrix(int n, int d, double omega) {
  if (omega < 2 * d || omega > n)
    throw std::invalid_argument("expectation_matrix: need 2d <= omega <= n");
  std::vector<double> values(static_cast<size_t>(d + 1));
  for (int t = 0; t <= d; ++t) {
    int u = 2 * d - t;
    double v = static_cast<double>(binom(n - u, 2 * d - u));
    v *= binom_real(omega, u) / static_cast<double>(binom(2 * d, u));
    v *= std::exp2(-static_cast<double>(d) * d - static_cast<double>(binom(t, 2)));
    values[static_cast<size_t>(t)] = v;
  }
  return build_set_symmetric(n, d, values);
}

struct EigReport {
  std::vector<double> lambda;         // eigenvalue of E on V_j
  std::vector<double> residual;       // ||E Pi_j - lambda_j Pi_j||_F / ||E||_F
  std::vector<double> scale_ratio;    // lambda_j / (n^d omega^(2d-j))
  std::vector<double> coarse_lower;   // well-defined prefix of the paper-scale bound
  bool within_tolerance = true;
};

inline EigReport eigen_report(const IndexedMatrix& e, const SymBasis& basis, double omega,
                              double rel_tol = 1e-6) {
  EigReport rep;
  const int d = basis.d;
  const int n = basis.n;
  double efro = std::max(e.a.norm(), 1e-300);
  for (int j = 0; j <= d; ++j) {
    const Mat& b = basis.basis[static_cast<size_t>(j)];
    Vec v = b.col(0);
    double lam = v.dot(e.a * v);
    Mat ep = e.a * b;
    double resid = (ep - lam * b).norm() / efro;
    rep.lambda.push_back(lam);
    rep.residual.push_back(resid);
    rep.scale_ratio.push_back(lam / (std::pow(static_cast<double>(n), d) * std::pow(omega, 2 * d - j)));
    double lb = 0.5 * static_cast<double>(binom(n - 2 * d + j, j)) *
                binom_real(omega, 2 * d - j) / static_cast<double>(binom(2 * d, 2 * d - j)) *
                std::exp2(-static_cast<double>(d) * d - static_cast<double>(binom(j, 2)));
    rep.coarse_lower.push_back(lb);
    if (resid > rel_tol) rep.within_tolerance = false;
  }
  return rep;
}

struct BlockPsdResult {
  bool pass = false;
  int bad_i = -1, bad_j = -1;
  double margin = 0.0;  // how far the worst inequality is from holding
  std::vector<double> diag_min;                // min eig of compressed diagonal blocks
  std::vector<std::vector<double>> cross_norm; // ||P_i M P_j||
};

// Checks P_i M P_i >= lambda_i P_i and ||P_i M P_j|| <= (2/k) sqrt(lambda_i lambda_j).
inline BlockPsdResult block_psd_certificate(const Mat& m, const std::vector<Mat>& bases,
                                            const std::vector<double>& lambda,
                                            double tol = 1e-9) {
  const size_t k = bases.size();
  if (lambda.size() != k) throw std::invalid_argument("block_psd_certificate: size mismatch");
  // validate orthogonal decomposition
  Eigen::Index total = 0;
  for (const auto& b : bases) total += b.cols();
  if (total != m.rows())
    throw std::invalid_argument("block_psd_certificate: bases do not span the space");
  for (size_t i = 0; i < k; ++i) {
    Mat g = bases[i].transpose() * bases[i];
    if ((g - Mat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() > 1e-8)
      throw std::invalid_argument("block_psd_certificate: basis not orthonormal");
    for (size_t j = i + 1; j < k; ++j) {
      if ((bases[i].transpose() * bases[j]).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("block_psd_certificate: subspaces not orthogonal");
    }
  }
  BlockPsdResult res;
  res.pass = true;
  res.diag_min.resize(k, 0.0);
  res.cross_norm.assign(k, std::vector<double>(k, 0.0));
  double mscale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (size_t i = 0; i < k; ++i) {
    Mat block = bases[i].transpose() * m * bases[i];
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (block + block.transpose()),
                                          Eigen::EigenvaluesOnly);
    double mn = es.eigenvalues()(0);
    res.diag_min[i] = mn;
    double slack = mn - lambda[i];
    if (slack < -tol * mscale && res.pass) {
      res.pass = false;
      res.bad_i = static_cast<int>(i);
      res.bad_j = static_cast<int>(i);
      res.margin = slack;
    }
    for (size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      Mat cross = bases[i].transpose() * m * bases[j];
      double nrm = cross.bdcSvd().singularValues()(0);
      res.cross_norm[i][j] = nrm;
      double bound = (2.0 / static_cast<double>(k)) * std::sqrt(std::max(0.0, lambda[i]) *
                                                                std::max(0.0, lambda[j]));
      if (nrm > bound + tol * mscale && res.pass) {
        res.pass = false;
        res.bad_i = static_cast<int>(i);
        res.bad_j = static_cast<int>(j);
        res.margin = nrm - bound;
      }
    }
  }
  return res;
}

}  // namespace pcm
