#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcm/combinatorics.hpp"

namespace pcm {

// Dense real matrix whose rows/columns are indexed by fixed-size subsets of
// {0..n-1} in lexicographic order.
struct IndexedMatrix {
  int n = 0;
  int row_size = 0;  // subset size indexing rows
  int col_size = 0;  // subset size indexing columns
  bool symmetric = false;
  Eigen::MatrixXd a;

  Eigen::Index rows() const { return a.rows(); }
  Eigen::Index cols() const { return a.cols(); }
};

inline IndexedMatrix make_indexed(int n, int row_size, int col_size, bool symmetric) {
  IndexedMatrix m;
  m.n = n;
  m.row_size = row_size;
  m.col_size = col_size;
  m.symmetric = symmetric;
  m.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(binom(n, row_size)),
                              static_cast<Eigen::Index>(binom(n, col_size)));
  return m;
}

// Caches all subsets of one size in lexicographic order for fast row decode.
inline std::vector<std::vector<int>> all_subsets(int n, int d) {
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<size_t>(binom(n, d)));
  if (d == 0) {
    out.emplace_back();
    return out;
  }
  std::vector<int> s = first_subset(d);
  do {
    out.push_back(s);
  } while (next_subset(s, n));
  return out;
}

// entry(I,J) = values[|I cap J|]
inline IndexedMatrix build_set_symmetric(int n, int d, std::span<const double> values) {
  if (static_cast<int>(values.size()) != d + 1)
    throw std::invalid_argument("build_set_symmetric: values must have d+1 entries");
  IndexedMatrix m = make_indexed(n, d, d, true);
  auto subs = all_subsets(n, d);
  const Eigen::Index N = m.rows();
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = i; j < N; ++j) {
      double v = values[static_cast<size_t>(intersection_size(subs[static_cast<size_t>(i)],
                                                              subs[static_cast<size_t>(j)]))];
      m.a(i, j) = v;
      m.a(j, i) = v;
    }
  }
  return m;
}

// Embeds a disjointly-supported matrix over (d-i)-subsets into the
// |I cap J| = i band of the d-subset matrix.
inline IndexedMatrix lift(const IndexedMatrix& x, int i, int d) {
  if (i < 0 || i > d) throw std::invalid_argument("lift: need 0 <= i <= d");
  if (x.row_size != d - i || x.col_size != d - i)
    throw std::invalid_argument("lift: input must be indexed by (d-i)-subsets");
  const int n = x.n;
  SubsetIndexer small(n, d - i);
  auto small_subs = all_subsets(n, d - i);
  // precondition: zero on overlapping index pairs
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (x.a(r, c) != 0.0 &&
          intersection_size(small_subs[static_cast<size_t>(r)], small_subs[static_cast<size_t>(c)]) != 0)
        throw std::invalid_argument("lift: input has a nonzero entry on overlapping subsets");
    }
  }
  IndexedMatrix out = make_indexed(n, d, d, false);
  auto subs = all_subsets(n, d);
  const Eigen::Index N = out.rows();
  std::vector<int> ri, ci;
  for (Eigen::Index r = 0; r < N; ++r) {
    const auto& I = subs[static_cast<size_t>(r)];
    for (Eigen::Index c = 0; c < N; ++c) {
      const auto& J = subs[static_cast<size_t>(c)];
      if (intersection_size(I, J) != i) continue;
      std::vector<int> K;
      {
        size_t p = 0, q = 0;
        while (p < I.size() && q < J.size()) {
          if (I[p] < J[q]) ++p;
          else if (J[q] < I[p]) ++q;
          else { K.push_back(I[p]); ++p; ++q; }
        }
      }
      ri = sorted_difference(I, K);
      ci = sorted_difference(J, K);
      out.a(r, c) = x.a(static_cast<Eigen::Index>(small.rank(ri)),
                        static_cast<Eigen::Index>(small.rank(ci)));
    }
  }
  return out;
}

// Binary cache: four little-endian int64 header fields
// (n, d_row, d_col, symmetry flag) then row-major little-endian doubles.
inline void save_matrix(const IndexedMatrix& m, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("save_matrix: cannot open " + path);
  std::int64_t hdr[4] = {m.n, m.row_size, m.col_size, m.symmetric ? 1 : 0};
  f.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    f.write(reinterpret_cast<const char*>(m.a.row(r).eval().data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(m.cols())));
  }
  if (!f) throw std::runtime_error("save_matrix: write failed for " + path);
}

inline bool load_matrix(const std::string& path, IndexedMatrix& out) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return false;
  std::int64_t hdr[4];
  f.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
  if (!f) return false;
  out.n = static_cast<int>(hdr[0]);
  out.row_size = static_cast<int>(hdr[1]);
  out.col_size = static_cast<int>(hdr[2]);
  out.symmetric = hdr[3] != 0;
  Eigen::Index rows = static_cast<Eigen::Index>(binom(out.n, out.row_size));
  Eigen::Index cols = static_cast<Eigen::Index>(binom(out.n, out.col_size));
  out.a.resize(rows, cols);
  std::vector<double> buf(static_cast<size_t>(cols));
  for (Eigen::Index r = 0; r < rows; ++r) {
    f.read(reinterpret_cast<char*>(buf.data()),
           static_cast<std::streamsize>(sizeof(double) * buf.size()));
    if (!f) return false;
    for (Eigen::Index c = 0; c < cols; ++c) out.a(r, c) = buf[static_cast<size_t>(c)];
  }
  return true;
}

}  // namespace pcm
