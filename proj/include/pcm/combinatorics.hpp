#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace pcm {

// Exact binomial coefficient.  Callers stay within k <= ~8 and n <= ~2000,
// where the product fits in 64 bits; overflow trips an assert.
inline std::uint64_t binom(long long n, long long k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 r = 1;
  for (long long i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
  }
  assert(r <= ~0ULL);
  return static_cast<std::uint64_t>(r);
}

// Generalized binomial via falling factorial; x may be any real.
inline double binom_real(double x, long long k) {
  if (k < 0) return 0.0;
  double r = 1.0;
  for (long long i = 0; i < k; ++i) r *= (x - static_cast<double>(i)) / static_cast<double>(k - i);
  return r;
}

// Order-preserving map [d] -> I for a sorted subset; position i (0-based)
// picks the i-th smallest element.  Pointwise extension to position sets.
inline std::vector<int> sorting_map_image(std::span<const int> sorted_subset,
                                          std::span<const int> positions) {
  std::vector<int> out;
  out.reserve(positions.size());
  for (int p : positions) {
    assert(p >= 0 && static_cast<size_t>(p) < sorted_subset.size());
    out.push_back(sorted_subset[static_cast<size_t>(p)]);
  }
  return out;
}

// Lexicographic bijection between d-subsets of {0..n-1} and [0, C(n,d)).
class SubsetIndexer {
 public:
  SubsetIndexer(int n, int d) : n_(n), d_(d) {
    if (d < 0 || n < 0 || d > n) throw std::invalid_argument("SubsetIndexer: need 0 <= d <= n");
    count_ = binom(n, d);
  }

  int ground_size() const { return n_; }
  int subset_size() const { return d_; }
  std::uint64_t count() const { return count_; }

  std::uint64_t rank(std::span<const int> subset) const {
    if (static_cast<int>(subset.size()) != d_)
      throw std::invalid_argument("rank: subset has wrong size");
    std::uint64_t r = 0;
    int prev = -1;
    for (int i = 0; i < d_; ++i) {
      int a = subset[static_cast<size_t>(i)];
      if (a <= prev || a >= n_) throw std::invalid_argument("rank: subset not sorted in range");
      // subsets agreeing up to position i-1 whose i-th element is in (prev, a)
      int m = d_ - 1 - i;
      r += binom(n_ - prev - 1, m + 1) - binom(n_ - a, m + 1);
      prev = a;
    }
    return r;
  }

  void unrank(std::uint64_t k, std::vector<int>& out) const {
    if (k >= count_) throw std::out_of_range("unrank: index out of range");
    out.resize(static_cast<size_t>(d_));
    int prev = -1;
    for (int i = 0; i < d_; ++i) {
      int m = d_ - 1 - i;
      int a = prev + 1;
      // advance a while skipping blocks of subsets starting below it
      while (true) {
        std::uint64_t block = binom(n_ - a - 1, m);
        if (k < block) break;
        k -= block;
        ++a;
      }
      out[static_cast<size_t>(i)] = a;
      prev = a;
    }
  }

  std::vector<int> unrank(std::uint64_t k) const {
    std::vector<int> out;
    unrank(k, out);
    return out;
  }

 private:
  int n_, d_;
  std::uint64_t count_;
};

// In-place lexicographic successor of a sorted d-subset of {0..n-1}.
inline bool next_subset(std::vector<int>& s, int n) {
  int d = static_cast<int>(s.size());
  for (int i = d - 1; i >= 0; --i) {
    if (s[static_cast<size_t>(i)] < n - d + i) {
      ++s[static_cast<size_t>(i)];
      for (int j = i + 1; j < d; ++j) s[static_cast<size_t>(j)] = s[static_cast<size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

inline std::vector<int> first_subset(int d) {
  std::vector<int> s(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) s[static_cast<size_t>(i)] = i;
  return s;
}

// Sorted union / intersection of small sorted vectors.
inline std::vector<int> sorted_union(std::span<const int> a, std::span<const int> b) {
  std::vector<int> out;
  out.reserve(a.size() + b.size());
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i] < b[j])) out.push_back(a[i++]);
    else if (i == a.size() || b[j] < a[i]) out.push_back(b[j++]);
    else { out.push_back(a[i]); ++i; ++j; }
  }
  return out;
}

inline int intersection_size(std::span<const int> a, std::span<const int> b) {
  int t = 0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) ++i;
    else if (b[j] < a[i]) ++j;
    else { ++t; ++i; ++j; }
  }
  return t;
}

inline std::vector<int> sorted_difference(std::span<const int> a, std::span<const int> b) {
  std::vector<int> out;
  size_t i = 0, j = 0;
  while (i < a.size()) {
    while (j < b.size() && b[j] < a[i]) ++j;
    if (j == b.size() || b[j] != a[i]) out.push_back(a[i]);
    ++i;
  }
  return out;
}

// Packs a sorted subset (elements < 1024, size <= 6) into a map key.
inline std::uint64_t subset_key(std::span<const int> sorted_subset) {
  assert(sorted_subset.size() <= 6);
  std::uint64_t k = static_cast<std::uint64_t>(sorted_subset.size());
  int shift = 4;
  for (int v : sorted_subset) {
    assert(v >= 0 && v < 1024);
    k |= static_cast<std::uint64_t>(v) << shift;
    shift += 10;
  }
  return k;
}

inline std::vector<int> decode_subset_key(std::uint64_t key) {
  int m = static_cast<int>(key & 0xF);
  std::vector<int> s(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i)
    s[static_cast<size_t>(i)] = static_cast<int>((key >> (4 + 10 * i)) & 1023);
  return s;
}

}  // namespace pcm
