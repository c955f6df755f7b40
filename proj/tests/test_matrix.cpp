#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <numeric>

#include "pcm/eig.hpp"
#include "pcm/matrix.hpp"
#include "pcm/rng.hpp"

using namespace pcm;

TEST_CASE("set symmetric basics") {
  std::vector<double> e_d{0, 0, 1};
  IndexedMatrix id = build_set_symmetric(6, 2, e_d);
  CHECK(id.a.isApprox(Eigen::MatrixXd::Identity(15, 15)));

  std::vector<double> ones{1, 1, 1};
  IndexedMatrix one = build_set_symmetric(6, 2, ones);
  CHECK(one.a.minCoeff() == 1.0);
  CHECK(one.a.maxCoeff() == 1.0);

  std::vector<double> wrong{1, 2};
  CHECK_THROWS_AS(build_set_symmetric(6, 2, wrong), std::invalid_argument);
}

TEST_CASE("set symmetric matrices are invariant under vertex relabeling") {
  const int n = 9, d = 3;
  std::vector<double> vals{0.3, -1.2, 2.0, 0.7};
  IndexedMatrix m = build_set_symmetric(n, d, vals);
  SubsetIndexer idx(n, d);
  auto subs = all_subsets(n, d);
  SplitMixStream rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> sigma(n);
    std::iota(sigma.begin(), sigma.end(), 0);
    for (int i = n - 1; i > 0; --i)
      std::swap(sigma[static_cast<size_t>(i)],
                sigma[static_cast<size_t>(rng.next_below(static_cast<std::uint64_t>(i + 1)))]);
    for (size_t r = 0; r < subs.size(); r += 7) {
      for (size_t c = 0; c < subs.size(); c += 5) {
        std::vector<int> ri, ci;
        for (int v : subs[r]) ri.push_back(sigma[static_cast<size_t>(v)]);
        for (int v : subs[c]) ci.push_back(sigma[static_cast<size_t>(v)]);
        std::sort(ri.begin(), ri.end());
        std::sort(ci.begin(), ci.end());
        CHECK(m.a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) ==
              m.a(static_cast<Eigen::Index>(idx.rank(ri)), static_cast<Eigen::Index>(idx.rank(ci))));
      }
    }
  }
}

namespace {

IndexedMatrix random_disjoint_supported(int n, int dsmall, SplitMixStream& rng) {
  IndexedMatrix x = make_indexed(n, dsmall, dsmall, false);
  auto subs = all_subsets(n, dsmall);
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      if (intersection_size(subs[static_cast<size_t>(r)], subs[static_cast<size_t>(c)]) == 0)
        x.a(r, c) = rng.next_gauss();
  return x;
}

double op_norm(const Eigen::MatrixXd& m) { return m.jacobiSvd().singularValues()(0); }

}  // namespace

TEST_CASE("lift structure") {
  const int n = 8, d = 3;
  SplitMixStream rng(7);
  IndexedMatrix x = random_disjoint_supported(n, d - 1, rng);
  IndexedMatrix l1 = lift(x, 1, d);
  auto subs = all_subsets(n, d);
  SubsetIndexer small(n, d - 1);
  for (size_t r = 0; r < subs.size(); ++r) {
    for (size_t c = 0; c < subs.size(); ++c) {
      int t = intersection_size(subs[r], subs[c]);
      double v = l1.a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      if (t != 1) {
        CHECK(v == 0.0);
      } else {
        std::vector<int> K;
        for (int a : subs[r])
          if (std::find(subs[c].begin(), subs[c].end(), a) != subs[c].end()) K.push_back(a);
        auto ri = sorted_difference(subs[r], K);
        auto ci = sorted_difference(subs[c], K);
        CHECK(v == x.a(static_cast<Eigen::Index>(small.rank(ri)),
                       static_cast<Eigen::Index>(small.rank(ci))));
      }
    }
  }

  // i = 0 keeps the disjoint entries as they are
  IndexedMatrix y = random_disjoint_supported(n, d, rng);
  IndexedMatrix l0 = lift(y, 0, d);
  CHECK(l0.a.isApprox(y.a));

  // linearity and the zero matrix
  IndexedMatrix z = make_indexed(n, d - 1, d - 1, false);
  CHECK(lift(z, 1, d).a.norm() == 0.0);

  IndexedMatrix bad = make_indexed(n, d - 1, d - 1, false);
  bad.a(0, 0) = 1.0;  // diagonal pair overlaps itself
  CHECK_THROWS_AS(lift(bad, 1, d), std::invalid_argument);
}

TEST_CASE("lift norm bound on random instances") {
  struct Case {
    int n, d, i;
  };
  for (Case cs : {Case{10, 3, 1}, Case{10, 3, 2}, Case{12, 2, 1}}) {
    SplitMixStream rng(static_cast<std::uint64_t>(cs.n * 100 + cs.d * 10 + cs.i));
    int violations = 0;
    for (int t = 0; t < 100; ++t) {
      IndexedMatrix x = random_disjoint_supported(cs.n, cs.d - cs.i, rng);
      IndexedMatrix lx = lift(x, cs.i, cs.d);
      double bound = static_cast<double>(binom(cs.d, cs.i)) * binom(cs.d, cs.i) * op_norm(x.a);
      if (op_norm(lx.a) > bound * (1 + 1e-12)) ++violations;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("matrix cache round trip") {
  SplitMixStream rng(12);
  IndexedMatrix m = make_indexed(7, 2, 2, true);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m.a(r, c) = rng.next_gauss();
  std::string path = "cache_test_tmp.mat";
  save_matrix(m, path);
  IndexedMatrix back;
  REQUIRE(load_matrix(path, back));
  CHECK(back.n == 7);
  CHECK(back.row_size == 2);
  CHECK(back.col_size == 2);
  CHECK(back.symmetric);
  CHECK(back.a.isApprox(m.a, 0.0));
  std::remove(path.c_str());
  CHECK_FALSE(load_matrix("definitely_missing_file.mat", back));
}

TEST_CASE("spectral norm estimators agree") {
  SplitMixStream rng(3);
  const int n = 60;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      a(i, j) = rng.next_gauss();
      a(j, i) = a(i, j);
    }
  double svd = op_norm(a);
  auto p = spectral_norm_power(a, true, 5000, 1e-10);
  CHECK(p.certified);
  CHECK(p.value == Catch::Approx(svd).epsilon(1e-6));
  double tr = spectral_norm_trace(a, 8);
  CHECK(tr >= svd * (1 - 1e-9));
  CHECK(tr <= svd * std::pow(static_cast<double>(n), 1.0 / 16.0) * (1 + 1e-9));
  CHECK(gershgorin_bound(a) >= svd * (1 - 1e-12));

  // identity and rank-1 sanity
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(20, 20);
  CHECK(spectral_norm_power(id, true).value == Catch::Approx(1.0));
  CHECK(spectral_norm_trace(id, 5) == Catch::Approx(std::pow(20.0, 1.0 / 10.0)));
  Eigen::VectorXd v(20);
  for (int i = 0; i < 20; ++i) v(i) = rng.next_gauss();
  Eigen::MatrixXd vv = v * v.transpose();
  CHECK(spectral_norm_power(vv, true).value == Catch::Approx(v.squaredNorm()));
}

TEST_CASE("min eig dense and lanczos agree") {
  SplitMixStream rng(9);
  const int n = 120;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      a(i, j) = rng.next_gauss();
      a(j, i) = a(i, j);
    }
  auto dense = min_eig_dense(a);
  auto lz = min_eig_sym(a, /*dense_limit=*/16);  // force the Lanczos path
  CHECK(lz.certified);
  CHECK(lz.value == Catch::Approx(dense.value).epsilon(1e-7));

  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(2, 2);
  d2(0, 0) = 3;
  d2(1, 1) = -2;
  CHECK(min_eig_sym(d2).value == Catch::Approx(-2.0));
  CHECK(min_eig_sym(Eigen::MatrixXd::Identity(5, 5)).value == Catch::Approx(1.0));

  Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(3, 3);
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(min_eig_sym(asym), std::invalid_argument);
}
