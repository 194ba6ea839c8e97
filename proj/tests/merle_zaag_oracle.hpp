#pragma once

// Random instances of the one-step Gamma recursion and a brute-force verdict
// built from the I/J sets of the dominance argument.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace mz {

struct Instance {
  std::vector<double> plus, zero, minus, delta;
  double C = 0;
};

// Entry k belongs to tau_bar = -k, delta(tau_bar) = exp(tau_bar / 8).
inline Instance generate(unsigned seed, std::size_t n = 200) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto logu = [&](double lo, double hi) { return std::exp(std::log(lo) + U(rng) * std::log(hi / lo)); };
  Instance s;
  s.C = logu(1e-3, 5e-2);
  double gp = logu(1e-6, 1.0), g0 = logu(1e-6, 1.0);
  if (U(rng) < 0.3) g0 = 1e-14 * gp;
  if (U(rng) < 0.2) gp = 1e-14 * g0;
  double gm = 0.1 * s.C * (gp + g0) * U(rng);
  for (std::size_t k = 0; k < n; ++k) {
    s.plus.push_back(gp);
    s.zero.push_back(g0);
    s.minus.push_back(gm);
    s.delta.push_back(std::exp(-static_cast<double>(k) / 8));
    const double e = s.C * std::pow(s.delta.back(), 1.0 / 200) * (gp + g0 + gm);
    const double np = std::clamp(std::exp(-1.0) * gp + (2 * U(rng) - 1) * e, 0.0, gp);
    const double n0 = std::clamp(g0 - U(rng) * e, 0.0, g0);
    const double lo = std::max(0.0, std::exp(1.0) * gm - e);
    // keep Gamma_minus a small multiple of the rest so later steps stay feasible
    const double target = 0.5 * U(rng) * s.C * (np + n0) / (std::exp(1.0) - 1);
    const double nm = std::clamp(target, std::min(lo, gm), gm);
    gp = np;
    g0 = n0;
    gm = nm;
  }
  return s;
}

// Walks forward in tau_bar through the trailing window and records, for every alpha
// on a log grid, whether {A < alpha B} and {A >= alpha B} are met there.
// I = alphas whose "<" set never shows up (bounded), J = alphas whose ">=" set does.
struct Sets {
  std::vector<double> alpha;
  std::vector<bool> in_I, in_J;
};

inline Sets sweep(const std::vector<double>& A, const std::vector<double>& B, std::size_t start,
                  const std::vector<double>& grid) {
  Sets s{grid, std::vector<bool>(grid.size(), true), std::vector<bool>(grid.size(), false)};
  for (std::size_t k = A.size(); k-- > start;) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (A[k] < grid[j] * B[k]) s.in_I[j] = false;
      else s.in_J[j] = true;
    }
  }
  return s;
}

inline std::string verdict(const Instance& s, double theta = 0.2, double trailing = 0.5) {
  const std::size_t n = s.plus.size();
  const auto start = static_cast<std::size_t>(std::floor(n * (1 - trailing)));
  std::vector<double> grid;
  for (int j = -600; j <= 600; ++j) grid.push_back(std::pow(10.0, j / 100.0));
  grid.push_back(1 / theta);
  grid.push_back(theta);
  std::vector<double> a0(n), b0(n), a1(n), b1(n);
  for (std::size_t k = 0; k < n; ++k) {
    a0[k] = s.zero[k];
    b0[k] = s.plus[k] + s.minus[k];
    a1[k] = s.zero[k] + s.minus[k];
    b1[k] = s.plus[k];
  }
  // neutral: every alpha up to 1/theta lies in I
  const auto neutral = sweep(a0, b0, start, grid);
  bool all_in = true;
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (grid[j] <= 1 / theta && !neutral.in_I[j]) all_in = false;
  for (std::size_t k = start; k < n; ++k) all_in = all_in && a0[k] > 0;
  if (all_in) return "NeutralDominates";
  // positive: no alpha >= theta lies in J
  const auto pos = sweep(a1, b1, start, grid);
  bool none = true;
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (grid[j] >= theta && pos.in_J[j]) none = false;
  if (none) return "PositiveDominates";
  return "Undetermined";
}

}  // namespace mz
