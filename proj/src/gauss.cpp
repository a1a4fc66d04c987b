#include "stbem/gauss.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace stbem {

namespace {

// Value and derivative of the Legendre polynomial P_n at x.
std::pair<double, double> legendre_pair(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

gauss_rule compute_gauss(int n) {
  gauss_rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, polished by Newton.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = legendre_pair(n, x);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    auto [p, dp] = legendre_pair(n, x);
    (void)p;
    r.nodes[n - 1 - i] = x;
    r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace

const gauss_rule& gauss_legendre(int n) {
  if (n < 1 || n > 2048) throw std::invalid_argument("gauss_legendre: order out of range");
  static std::map<int, gauss_rule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss(n)).first;
  return it->second;
}

const triangle_rule& triangle_gauss(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("triangle_gauss: order out of range");
  static std::map<int, triangle_rule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  const gauss_rule& g = gauss_legendre(n);
  triangle_rule tr;
  tr.a.reserve(n * n);
  tr.b.reserve(n * n);
  tr.w.reserve(n * n);
  // Collapsed map: a = u, b = v (1-u) over the unit square, Jacobian (1-u).
  for (int i = 0; i < n; ++i) {
    double u = 0.5 * (g.nodes[i] + 1.0);
    double wu = 0.5 * g.weights[i];
    for (int j = 0; j < n; ++j) {
      double v = 0.5 * (g.nodes[j] + 1.0);
      double wv = 0.5 * g.weights[j];
      tr.a.push_back(u);
      tr.b.push_back(v * (1.0 - u));
      tr.w.push_back(2.0 * wu * wv * (1.0 - u));
    }
  }
  return cache.emplace(n, std::move(tr)).first->second;
}

}  // namespace stbem
