// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdlib>
#include <fstream>
#include <random>
#include <string>

#include <json.hpp>

#include "gpvortex/gpvortex.hpp"

namespace gpvtest {

inline std::string fixture_dir() {
  if (const char* env = std::getenv("GPVORTEX_FIXTURES")) return env;
  return GPV_FIXTURE_DIR;
}

inline nlohmann::json load_fixture(const std::string& name) {
  std::ifstream in(fixture_dir() + "/" + name);
  if (!in) throw std::runtime_error("missing fixture " + name);
  return nlohmann::json::parse(in);
}

/// Shared Townes profile per grid; tests reuse it to keep runtimes sane.
inline const gpv::KwongProfile& kwong(int n, double L) {
  static std::map<std::pair<int, double>, gpv::KwongProfile> cache;
  auto key = std::make_pair(n, L);
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto prof = gpv::solve_kwong_radial(1e-12, std::max(25.0, L * 1.5));
    it = cache.emplace(key, gpv::rasterize(prof, gpv::GridSpec(n, L), true)).first;
  }
  return it->second;
}

/// Deterministic smooth decaying test field: a few random Gaussian bumps.
inline gpv::RealField random_smooth_field(const gpv::GridSpec& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> pos(-0.25 * g.Lx, 0.25 * g.Lx);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> wid(0.6, 2.0);
  struct Bump {
    double cx, cy, a, s;
  };
  std::vector<Bump> bumps;
  for (int b = 0; b < 4; ++b) bumps.push_back({pos(rng), pos(rng), amp(rng), wid(rng)});
  return gpv::make_real_field(g, [&](double x, double y) {
    double v = 0.0;
    for (const auto& b : bumps) {
      const double dx = x - b.cx, dy = y - b.cy;
      v += b.a * std::exp(-(dx * dx + dy * dy) / (2.0 * b.s * b.s));
    }
    return v;
  });
}

} // namespace gpvtest
