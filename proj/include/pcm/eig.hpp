#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pcm/rng.hpp"

namespace pcm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Matrix-free linear operator.  applyT may be empty for symmetric operators.
struct LinOp {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::function<void(const Vec&, Vec&)> apply;
  std::function<void(const Vec&, Vec&)> applyT;

  bool symmetric() const { return !applyT; }
};

inline LinOp dense_op(const Mat& m, bool symmetric) {
  LinOp op;
  op.rows = m.rows();
  op.cols = m.cols();
  op.apply = [&m](const Vec& x, Vec& y) { y.noalias() = m * x; };
  if (!symmetric) op.applyT = [&m](const Vec& x, Vec& y) { y.noalias() = m.transpose() * x; };
  return op;
}

struct SpectrumEstimate {
  double value = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool certified = false;
};

// max_i sum_j |M_ij| crossed with the column version; for symmetric M this is
// the plain row-sum bound on the spectral norm.
inline double gershgorin_bound(const Mat& m) {
  double row = 0.0, col = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) row = std::max(row, m.row(i).template lpNorm<1>());
  for (Eigen::Index j = 0; j < m.cols(); ++j) col = std::max(col, m.col(j).template lpNorm<1>());
  return std::sqrt(row * col);
}

// Power iteration on M M^T; returns the dominant singular value with the
// residual ||M M^T v - s^2 v|| / s^2.
inline SpectrumEstimate spectral_norm_power(const LinOp& op, int max_iters = 2000,
                                            double tol = 1e-9, std::uint64_t seed = 12345) {
  SpectrumEstimate est;
  if (op.rows == 0 || op.cols == 0) {
    est.value = 0;
    est.residual = 0;
    est.certified = true;
    return est;
  }
  SplitMixStream rng(seed);
  Vec v(op.rows);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.next_gauss();
  v.normalize();
  Vec t(op.cols), w(op.rows);
  double s2 = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    if (op.symmetric()) {
      // two applies per step so sign-symmetric spectra converge
      op.apply(v, t);
      op.apply(t, w);
    } else {
      op.applyT(v, t);
      op.apply(t, w);
    }
    s2 = v.dot(w);  // Rayleigh quotient of M M^T
    double wn = w.norm();
    if (wn == 0.0) {
      est.value = 0;
      est.residual = 0;
      est.iterations = it;
      est.certified = true;
      return est;
    }
    double resid = (w - s2 * v).norm() / std::max(wn, 1e-300);
    est.value = std::sqrt(std::max(0.0, s2));
    est.residual = resid;
    est.iterations = it;
    v = w / wn;
    if (resid <= tol) {
      est.certified = true;
      break;
    }
  }
  return est;
}

inline SpectrumEstimate spectral_norm_power(const Mat& m, bool symmetric = true,
                                            int max_iters = 2000, double tol = 1e-9,
                                            std::uint64_t seed = 12345) {
  LinOp op = dense_op(m, symmetric);
  return spectral_norm_power(op, max_iters, tol, seed);
}

// Tr((M M^T)^ell)^(1/2 ell) via binary exponentiation; default ell near log2 n.
inline double spectral_norm_trace(const Mat& m, int ell = 0) {
  if (m.rows() == 0) return 0.0;
  if (ell <= 0) ell = std::max(1, static_cast<int>(std::ceil(std::log2(static_cast<double>(m.rows())))));
  Mat b = m * m.transpose();
  // scale to avoid overflow, track log
  double scale = b.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  b /= scale;
  double logtr = 0.0;
  Mat acc = Mat::Identity(b.rows(), b.cols());
  int e = ell;
  double log_scale_pow = 0.0;  // log of scale^ell
  Mat base = b;
  double base_log = std::log(scale);
  while (e > 0) {
    if (e & 1) {
      acc = acc * base;
      log_scale_pow += base_log;
      double c = acc.cwiseAbs().maxCoeff();
      if (c > 0) {
        acc /= c;
        log_scale_pow += std::log(c);
      }
    }
    e >>= 1;
    if (e > 0) {
      base = base * base;
      base_log *= 2;
      double c = base.cwiseAbs().maxCoeff();
      if (c > 0) {
        base /= c;
        base_log += std::log(c);
      }
    }
  }
  double tr = acc.trace();
  if (tr <= 0) return 0.0;
  logtr = std::log(tr) + log_scale_pow;
  return std::exp(logtr / (2.0 * ell));
}

// smallest eigenvalue by full symmetric eigendecomposition
inline SpectrumEstimate min_eig_dense(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw std::runtime_error("min_eig_dense: eigensolver failed");
  SpectrumEstimate est;
  est.value = es.eigenvalues()(0);
  Vec v = es.eigenvectors().col(0);
  est.residual = (m * v - est.value * v).norm();
  est.iterations = 1;
  est.certified = true;
  return est;
}

namespace detail {

// Lanczos with full reorthogonalization on the shifted operator sigma*I - M,
// so the smallest eigenvalue of M becomes the dominant one.
inline SpectrumEstimate lanczos_min_eig(const std::function<void(const Vec&, Vec&)>& mul,
                                        Eigen::Index dim, double sigma, double target_resid,
                                        int max_steps, std::uint64_t seed) {
  SplitMixStream rng(seed);
  std::vector<Vec> basis;
  std::vector<double> alpha, beta;  // tridiagonal coefficients
  Vec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.next_gauss();
  v.normalize();
  basis.push_back(v);
  Vec w(dim), mv(dim);
  SpectrumEstimate best;
  for (int k = 0; k < max_steps; ++k) {
    const Vec& vk = basis.back();
    mul(vk, mv);
    w = sigma * vk - mv;  // (sigma I - M) v
    double a = vk.dot(w);
    alpha.push_back(a);
    w -= a * vk;
    if (k > 0) w -= beta.back() * basis[basis.size() - 2];
    // full reorthogonalization, two passes
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& q : basis) w -= q.dot(w) * q;
    double b = w.norm();

    // Ritz extraction every few steps
    if ((k + 1) % 8 == 0 || b < 1e-13 || k == max_steps - 1) {
      int m = static_cast<int>(alpha.size());
      Mat t = Mat::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        t(i, i) = alpha[static_cast<size_t>(i)];
        if (i + 1 < m) {
          t(i, i + 1) = beta[static_cast<size_t>(i)];
          t(i + 1, i) = beta[static_cast<size_t>(i)];
        }
      }
      Eigen::SelfAdjointEigenSolver<Mat> es(t, Eigen::ComputeEigenvectors);
      int top = m - 1;  // largest eigenvalue of shifted operator
      double theta = es.eigenvalues()(top);
      Vec y = es.eigenvectors().col(top);
      Vec ritz = Vec::Zero(dim);
      for (int i = 0; i < m; ++i) ritz += y(i) * basis[static_cast<size_t>(i)];
      ritz.normalize();
      mul(ritz, mv);
      double lam = ritz.dot(mv);
      double resid = (mv - lam * ritz).norm();
      if (resid < best.residual) {
        best.value = lam;
        best.residual = resid;
        best.iterations = k + 1;
      }
      if (resid <= target_resid) {
        best.certified = true;
        return best;
      }
    }
    if (b < 1e-13) break;  // invariant subspace found
    beta.push_back(b);
    basis.push_back(w / b);
  }
  best.certified = best.residual <= target_resid;
  return best;
}

}  // namespace detail

// Smallest eigenvalue with certified residual.  Dense eigendecomposition up
// to `dense_limit`, Lanczos on the shifted operator above it.
inline SpectrumEstimate min_eig_sym(const Mat& m, Eigen::Index dense_limit = 2000,
                                    double rel_resid = 1e-8, std::uint64_t seed = 777) {
  if (m.rows() != m.cols()) throw std::invalid_argument("min_eig_sym: matrix not square");
  double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  double scale = std::max(1e-300, m.cwiseAbs().maxCoeff());
  if (asym > 1e-9 * scale) throw std::invalid_argument("min_eig_sym: matrix not symmetric");
  if (m.rows() <= dense_limit) return min_eig_dense(m);
  // lower bound on ||M|| from the largest column norm keeps the certificate honest
  double colmax = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) colmax = std::max(colmax, m.col(j).norm());
  double target = rel_resid * colmax;
  double sigma = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) sigma = std::max(sigma, m.row(i).template lpNorm<1>());
  auto mul = [&m](const Vec& x, Vec& y) { y.noalias() = m * x; };
  return detail::lanczos_min_eig(mul, m.rows(), sigma, target, 600, seed);
}

}  // namespace pcm
