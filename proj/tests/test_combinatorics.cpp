#include <catch2/catch_amalgamated.hpp>

#include "pcm/combinatorics.hpp"
#include "pcm/rng.hpp"

using namespace pcm;

TEST_CASE("binomials") {
  CHECK(binom(10, 4) == 210);
  CHECK(binom(4, 0) == 1);
  CHECK(binom(3, 5) == 0);
  CHECK(binom(0, 0) == 1);
  CHECK(binom_real(10.0, 4) == Catch::Approx(210.0));
  CHECK(binom_real(4.5, 2) == Catch::Approx(4.5 * 3.5 / 2));
  CHECK(binom_real(7.0, 0) == 1.0);
  CHECK(binom_real(7.0, -1) == 0.0);
}

TEST_CASE("rank and unrank are inverse bijections") {
  SubsetIndexer idx(8, 3);
  CHECK(idx.count() == 56);
  // lexicographic first subset has rank 0
  std::vector<int> first{0, 1, 2};
  CHECK(idx.rank(first) == 0);
  // exhaustive roundtrip, ranks strictly increasing in lex order
  std::vector<int> s = first_subset(3);
  std::uint64_t expect = 0;
  do {
    CHECK(idx.rank(s) == expect);
    CHECK(idx.unrank(expect) == s);
    ++expect;
  } while (next_subset(s, 8));
  CHECK(expect == 56);
}

TEST_CASE("total enumeration count at n=10 d=4") {
  SubsetIndexer idx(10, 4);
  CHECK(idx.count() == 210);
  std::vector<int> s = first_subset(4);
  int count = 1;
  while (next_subset(s, 10)) ++count;
  CHECK(count == 210);
}

TEST_CASE("indexer rejects bad input") {
  SubsetIndexer idx(8, 3);
  std::vector<int> wrong{1, 2};
  CHECK_THROWS_AS(idx.rank(wrong), std::invalid_argument);
  std::vector<int> unsorted{3, 2, 5};
  CHECK_THROWS_AS(idx.rank(unsorted), std::invalid_argument);
  CHECK_THROWS_AS(idx.unrank(56), std::out_of_range);
}

TEST_CASE("sorting map picks ascending elements") {
  // I = {7,3,9} sorted is {3,7,9}: position 0 -> 3, 1 -> 7, 2 -> 9
  std::vector<int> I{3, 7, 9};
  std::vector<int> all{0, 1, 2};
  CHECK(sorting_map_image(I, all) == std::vector<int>{3, 7, 9});
  std::vector<int> identity{0, 1, 2};
  std::vector<int> J{0, 1, 2};
  CHECK(sorting_map_image(J, identity) == J);
  // pointwise extension: positions {0,2} of {3,7,9} -> {3,9}
  std::vector<int> pos{0, 2};
  CHECK(sorting_map_image(I, pos) == std::vector<int>{3, 9});
}

TEST_CASE("set helpers") {
  std::vector<int> a{1, 3, 5}, b{3, 4};
  CHECK(sorted_union(a, b) == std::vector<int>{1, 3, 4, 5});
  CHECK(intersection_size(a, b) == 1);
  CHECK(sorted_difference(a, b) == std::vector<int>{1, 5});
}

TEST_CASE("subset keys roundtrip") {
  std::vector<int> s{0, 17, 1023};
  CHECK(decode_subset_key(subset_key(s)) == s);
  CHECK(decode_subset_key(subset_key({})).empty());
  SplitMixStream rng(5);
  for (int t = 0; t < 50; ++t) {
    std::vector<int> v;
    int k = static_cast<int>(rng.next_below(7));
    while (static_cast<int>(v.size()) < k) {
      int x = static_cast<int>(rng.next_below(1024));
      if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
    }
    std::sort(v.begin(), v.end());
    CHECK(decode_subset_key(subset_key(v)) == v);
  }
}
