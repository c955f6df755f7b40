#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <fstream>

#include "pcm/records.hpp"

using namespace pcm;

TEST_CASE("sha1 known vectors") {
  CHECK(sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
  CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
  CHECK(sha1_hex("The quick brown fox jumps over the lazy dog") ==
        "2fd4e1c67a2d28fced849ee1bb76e7391b93eb12");
}

TEST_CASE("run config round trips through key=value text") {
  RunConfig c;
  c.command = "check-psd";
  c.n = 60;
  c.d = 2;
  c.omega = 4.25;
  c.omega_grid = "4:12:5";
  c.gamma = 0.5;
  c.seeds = 10;
  c.seed_base = 99;
  c.variant = "corrected";
  c.out_path = "out.jsonl";
  c.cache_dir = "/tmp/cache";
  c.threads = 3;
  c.tolerance = 1e-9;
  RunConfig back = RunConfig::from_kv(c.to_kv());
  CHECK(back.to_kv() == c.to_kv());
  CHECK(back.omega == c.omega);
  CHECK(back.seed_base == c.seed_base);
}

TEST_CASE("omega grid parsing") {
  auto g = parse_omega_grid("4:12:5");
  REQUIRE(g.size() == 5);
  CHECK(g.front() == 4.0);
  CHECK(g.back() == 12.0);
  CHECK(g[1] == Catch::Approx(6.0));
  auto single = parse_omega_grid("7.5");
  REQUIRE(single.size() == 1);
  CHECK(single[0] == 7.5);
  CHECK_THROWS_AS(parse_omega_grid("4:12"), std::invalid_argument);
}

TEST_CASE("record writer emits one json object per line") {
  std::string path = "records_test_tmp.jsonl";
  {
    RecordWriter w(path);
    nlohmann::json a{{"x", 1}}, b{{"y", 2.5}};
    w.write(a);
    w.write(b);
  }
  std::ifstream f(path);
  std::string line;
  int lines = 0;
  while (std::getline(f, line)) {
    auto j = nlohmann::json::parse(line);
    ++lines;
  }
  CHECK(lines == 2);
  std::remove(path.c_str());
}

TEST_CASE("identical configs hash identically") {
  RunConfig a, b;
  a.command = b.command = "sweep-threshold";
  a.n = b.n = 40;
  CHECK(base_record(a)["config_hash"] == base_record(b)["config_hash"]);
  b.n = 41;
  CHECK(base_record(a)["config_hash"] != base_record(b)["config_hash"]);
}
