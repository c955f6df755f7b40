#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace pcm {

// Compact SHA-1, used to fingerprint configs and input files in run records.
inline std::string sha1_hex(const std::string& data) {
  auto rol = [](std::uint32_t v, int s) { return (v << s) | (v >> (32 - s)); };
  std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
  std::string msg = data;
  std::uint64_t ml = static_cast<std::uint64_t>(msg.size()) * 8;
  msg.push_back(static_cast<char>(0x80));
  while (msg.size() % 64 != 56) msg.push_back('\0');
  for (int i = 7; i >= 0; --i) msg.push_back(static_cast<char>((ml >> (8 * i)) & 0xFF));
  for (size_t chunk = 0; chunk < msg.size(); chunk += 64) {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i) {
      w[i] = (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[chunk + 4 * i])) << 24) |
             (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[chunk + 4 * i + 1])) << 16) |
             (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[chunk + 4 * i + 2])) << 8) |
             static_cast<std::uint32_t>(static_cast<unsigned char>(msg[chunk + 4 * i + 3]));
    }
    for (int i = 16; i < 80; ++i) w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) { f = (b & c) | (~b & d); k = 0x5A827999u; }
      else if (i < 40) { f = b ^ c ^ d; k = 0x6ED9EBA1u; }
      else if (i < 60) { f = (b & c) | (b & d) | (c & d); k = 0x8F1BBCDCu; }
      else { f = b ^ c ^ d; k = 0xCA62C1D6u; }
      std::uint32_t tmp = rol(a, 5) + f + e + k + w[i];
      e = d; d = c; c = rol(b, 30); b = a; a = tmp;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d; h[4] += e;
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (std::uint32_t v : h) os << std::setw(8) << v;
  return os.str();
}

// Experiment configuration; round-trips through the key=value format.
struct RunConfig {
  std::string command;
  int n = 0;
  int d = 2;
  double omega = 0.0;
  std::string omega_grid;  // "a:b:steps", empty when a single omega is used
  double gamma = 1.0;
  int seeds = 1;
  std::uint64_t seed_base = 1;
  std::string variant = "mpw";
  std::string out_path;
  std::string cache_dir;
  int threads = 0;
  double tolerance = 1e-8;

  std::string to_kv() const {
    std::ostringstream os;
    os.precision(17);
    os << "command=" << command << "\n"
       << "n=" << n << "\n"
       << "d=" << d << "\n"
       << "omega=" << omega << "\n"
       << "omega_grid=" << omega_grid << "\n"
       << "gamma=" << gamma << "\n"
       << "seeds=" << seeds << "\n"
       << "seed_base=" << seed_base << "\n"
       << "variant=" << variant << "\n"
       << "out=" << out_path << "\n"
       << "cache=" << cache_dir << "\n"
       << "threads=" << threads << "\n"
       << "tolerance=" << tolerance << "\n";
    return os.str();
  }

  static RunConfig from_kv(const std::string& text) {
    RunConfig c;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string k = line.substr(0, eq), v = line.substr(eq + 1);
      if (k == "command") c.command = v;
      else if (k == "n") c.n = std::stoi(v);
      else if (k == "d") c.d = std::stoi(v);
      else if (k == "omega") c.omega = std::stod(v);
      else if (k == "omega_grid") c.omega_grid = v;
      else if (k == "gamma") c.gamma = std::stod(v);
      else if (k == "seeds") c.seeds = std::stoi(v);
      else if (k == "seed_base") c.seed_base = std::stoull(v);
      else if (k == "variant") c.variant = v;
      else if (k == "out") c.out_path = v;
      else if (k == "cache") c.cache_dir = v;
      else if (k == "threads") c.threads = std::stoi(v);
      else if (k == "tolerance") c.tolerance = std::stod(v);
    }
    return c;
  }
};

// Expands "a:b:steps" into an inclusive grid; a bare number is a 1-point grid.
inline std::vector<double> parse_omega_grid(const std::string& spec) {
  std::vector<double> grid;
  auto c1 = spec.find(':');
  if (c1 == std::string::npos) {
    grid.push_back(std::stod(spec));
    return grid;
  }
  auto c2 = spec.find(':', c1 + 1);
  if (c2 == std::string::npos) throw std::invalid_argument("omega grid must be a:b:steps");
  double a = std::stod(spec.substr(0, c1));
  double b = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
  int steps = std::stoi(spec.substr(c2 + 1));
  if (steps < 1) throw std::invalid_argument("omega grid needs at least one step");
  for (int i = 0; i < steps; ++i)
    grid.push_back(steps == 1 ? a : a + (b - a) * i / (steps - 1));
  return grid;
}

class RecordWriter {
 public:
  explicit RecordWriter(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::app);
      if (!file_) throw std::runtime_error("RecordWriter: cannot open " + path);
    }
  }

  void write(const nlohmann::json& j) {
    if (file_.is_open()) file_ << j.dump() << "\n";
  }

  void flush() {
    if (file_.is_open()) file_.flush();
  }

 private:
  std::ofstream file_;
};

inline nlohmann::json base_record(const RunConfig& cfg) {
  nlohmann::json j;
  j["command"] = cfg.command;
  j["n"] = cfg.n;
  j["d"] = cfg.d;
  j["omega"] = cfg.omega;
  j["gamma"] = cfg.gamma;
  j["variant"] = cfg.variant;
  j["config_hash"] = sha1_hex(cfg.to_kv());
  return j;
}

class WallClock {
 public:
  WallClock() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace pcm
