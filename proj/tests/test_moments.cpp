#include <catch2/catch_amalgamated.hpp>

#include "pcm/moments.hpp"

using namespace pcm;

namespace {

Graph complete_graph(int n) {
  Graph g(n);
  for (int b = 1; b < n; ++b)
    for (int a = 0; a < b; ++a) g.set_edge(a, b, true);
  return g;
}

// direct per-entry counting over all T, independent of the assembly loop
IndexedMatrix brute_filled_matrix(const Graph& g, int d, double omega) {
  const int n = g.size();
  ScalarTable st = scalar_table(n, d, omega);
  IndexedMatrix m = make_indexed(n, d, d, true);
  auto subs = all_subsets(n, d);
  for (size_t r = 0; r < subs.size(); ++r) {
    for (size_t c = 0; c < subs.size(); ++c) {
      const auto& I = subs[r];
      const auto& J = subs[c];
      auto u = sorted_union(I, J);
      std::uint64_t count = 0;
      std::vector<int> t = first_subset(2 * d);
      do {
        if (!std::includes(t.begin(), t.end(), u.begin(), u.end())) continue;
        bool ok = true;
        for (size_t i = 0; i < t.size() && ok; ++i) {
          for (size_t j = i + 1; j < t.size() && ok; ++j) {
            int a = t[i], b = t[j];
            bool in_I = std::find(I.begin(), I.end(), a) != I.end() &&
                        std::find(I.begin(), I.end(), b) != I.end();
            bool in_J = std::find(J.begin(), J.end(), a) != J.end() &&
                        std::find(J.begin(), J.end(), b) != J.end();
            if (in_I || in_J) continue;
            if (!g.has_edge(a, b)) ok = false;
          }
        }
        if (ok) ++count;
      } while (next_subset(t, n));
      m.a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          st.beta[static_cast<size_t>(intersection_size(I, J))] * static_cast<double>(count);
    }
  }
  return m;
}

}  // namespace

TEST_CASE("scalar table") {
  // beta(0) = C(omega, 2d) since C(2d,2d) = 1
  ScalarTable t = scalar_table(100, 2, 10);
  CHECK(t.beta[0] == Catch::Approx(static_cast<double>(binom(10, 4))));
  CHECK(t.p[2] == 1.0);
  CHECK(t.p[0] == Catch::Approx(std::exp2(-4.0)));
  // alpha(0) = C(10,4) * C(96,0) * 2^-4 = 13.125
  CHECK(t.alpha[0] == Catch::Approx(13.125));
  // independent evaluation of alpha(1): C(10,3)/C(4,3) * C(97,1) * 2^-4
  double a1 = (static_cast<double>(binom(10, 3)) / binom(4, 3)) * 97.0 / 16.0;
  CHECK(t.alpha[1] == Catch::Approx(a1));
  // beta monotone for integer omega >= 2d
  for (double omega : {4.0, 6.0, 10.0}) {
    ScalarTable s = scalar_table(100, 2, omega);
    CHECK(s.beta[2] <= s.beta[1] + 1e-12);
    CHECK(s.beta[1] <= s.beta[0] + 1e-12);
  }
  CHECK_THROWS_AS(scalar_table(100, 2, 3.0), std::invalid_argument);
}

TEST_CASE("non-integer omega uses falling factorials") {
  ScalarTable t = scalar_table(50, 2, 5.5);
  CHECK(t.beta[0] == Catch::Approx(5.5 * 4.5 * 3.5 * 2.5 / 24.0));
}

TEST_CASE("mpw pseudoexpectation basics") {
  Graph g = sample_gnp(20, 12);
  PseudoExpectation pe = mpw_pseudoexpectation(g, 2, 5);
  CHECK(pe.value({}) == 1.0);
  // a non-clique pair gets zero
  bool found = false;
  for (int a = 0; a < 20 && !found; ++a)
    for (int b = a + 1; b < 20; ++b)
      if (!g.has_edge(a, b)) {
        std::vector<int> s{a, b};
        CHECK(pe.value(s) == 0.0);
        found = true;
        break;
      }
  CHECK(found);
  // clique values strictly positive for omega > 2d
  for (const auto& [key, val] : pe.values[2]) CHECK(val > 0.0);
  for (const auto& [key, val] : pe.values[4]) CHECK(val > 0.0);
}

TEST_CASE("mpw closed form on the complete graph") {
  const int n = 8, d = 2;
  const double omega = 5;
  Graph k = complete_graph(n);
  PseudoExpectation pe = mpw_pseudoexpectation(k, d, omega);
  for (int sz = 1; sz <= 2 * d; ++sz) {
    std::vector<int> s = first_subset(sz);
    double expect = (static_cast<double>(binom(n - sz, 2 * d - sz)) / binom(n, 2 * d)) *
                    binom_real(omega, sz) / binom(2 * d, sz);
    CHECK(pe.value(s) == Catch::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("mpw rejects graphs without a 2d-clique") {
  Graph g(6);  // edgeless
  CHECK_THROWS_AS(mpw_pseudoexpectation(g, 2, 5), std::domain_error);
}

TEST_CASE("program constraints hold for mpw") {
  Graph g = sample_gnp(20, 3);
  PseudoExpectation pe = mpw_pseudoexpectation(g, 2, 5);
  ConstraintReport rep = verify_program_constraints(pe, g);
  CHECK(rep.max_recursion_violation <= 1e-10);
  CHECK(rep.max_nonclique_value == 0.0);
}

TEST_CASE("moment matrix identity and structure") {
  Graph g = sample_gnp(12, 5);
  PseudoExpectation pe = mpw_pseudoexpectation(g, 2, 5);
  IndexedMatrix m = moment_matrix(pe);
  auto subs = all_subsets(12, 2);
  const double c = static_cast<double>(pe.clique_count);
  for (size_t r = 0; r < subs.size(); ++r) {
    // non-clique rows vanish
    if (!g.is_clique(subs[r])) {
      CHECK(m.a.row(static_cast<Eigen::Index>(r)).cwiseAbs().maxCoeff() == 0.0);
    }
    // diagonal equals C_2d * value
    CHECK(m.a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r)) ==
          Catch::Approx(c * pe.value(subs[r])).margin(1e-12));
    for (size_t cc = 0; cc < subs.size(); ++cc) {
      auto u = sorted_union(subs[r], subs[cc]);
      CHECK(m.a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cc)) ==
            Catch::Approx(c * pe.value(u)).margin(1e-12));
    }
  }
}

TEST_CASE("moment matrix closed form on K6") {
  Graph k = complete_graph(6);
  PseudoExpectation pe = mpw_pseudoexpectation(k, 2, 4);
  IndexedMatrix m = moment_matrix(pe);
  auto subs = all_subsets(6, 2);
  for (size_t r = 0; r < subs.size(); ++r)
    for (size_t c = 0; c < subs.size(); ++c) {
      int u = 4 - intersection_size(subs[r], subs[c]);
      double expect = static_cast<double>(binom(6 - u, 4 - u));
      CHECK(m.a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) ==
            Catch::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("filled matrix on the complete graph") {
  const int n = 9, d = 2;
  const double omega = 5;
  Graph k = complete_graph(n);
  IndexedMatrix mp = filled_matrix(k, d, omega);
  ScalarTable st = scalar_table(n, d, omega);
  auto subs = all_subsets(n, d);
  for (size_t r = 0; r < subs.size(); ++r)
    for (size_t c = 0; c < subs.size(); ++c) {
      int t = intersection_size(subs[r], subs[c]);
      int u = 2 * d - t;
      double expect = st.beta[static_cast<size_t>(t)] * binom(n - u, 2 * d - u);
      CHECK(mp.a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) ==
            Catch::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("filled matrix equals brute-force T summation") {
  Graph g = sample_gnp(14, 8);
  IndexedMatrix fast = filled_matrix(g, 2, 5);
  IndexedMatrix slow = brute_filled_matrix(g, 2, 5);
  CHECK((fast.a - slow.a).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("clique-indexed principal submatrix of M' equals M") {
  Graph g = sample_gnp(13, 4);
  PseudoExpectation pe = mpw_pseudoexpectation(g, 2, 5);
  IndexedMatrix m = moment_matrix(pe);
  IndexedMatrix mp = filled_matrix(g, 2, 5);
  auto subs = all_subsets(13, 2);
  for (size_t r = 0; r < subs.size(); ++r) {
    if (!g.is_clique(subs[r])) continue;
    for (size_t c = 0; c < subs.size(); ++c) {
      if (!g.is_clique(subs[c])) continue;
      CHECK(mp.a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) ==
            Catch::Approx(m.a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)))
                .margin(1e-10));
    }
  }
}

TEST_CASE("parallel and serial filled matrix agree") {
  Graph g = sample_gnp(30, 77);
  int saved = thread_count();
  set_thread_count(1);
  IndexedMatrix serial = filled_matrix(g, 2, 6);
  set_thread_count(4);
  IndexedMatrix par = filled_matrix(g, 2, 6);
  set_thread_count(saved);
  CHECK((serial.a - par.a).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("min_eig wrapper") {
  IndexedMatrix m = make_indexed(5, 1, 1, true);
  m.a = Eigen::MatrixXd::Identity(5, 5);
  MinEigReport r = min_eig(m);
  CHECK(r.value == Catch::Approx(1.0));
  CHECK(r.is_psd);
  m.a(1, 1) = -2;
  m.a(0, 0) = 3;
  MinEigReport r2 = min_eig(m);
  CHECK(r2.value == Catch::Approx(-2.0));
  CHECK_FALSE(r2.is_psd);
}

TEST_CASE("filled matrix is PSD at small omega") {
  // desk-scale check at n=30: omega = 4 is comfortably below threshold
  int psd = 0;
  for (int t = 0; t < 3; ++t) {
    Graph g = sample_gnp(30, 300 + static_cast<std::uint64_t>(t));
    IndexedMatrix mp = filled_matrix(g, 2, 4);
    if (min_eig(mp).is_psd) ++psd;
  }
  CHECK(psd == 3);
}
