#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "stbem/gauss.hpp"
#include "stbem/pc_basis.hpp"

using namespace stbem;

namespace {

// Unnormalized Legendre recurrence, independent of the library path.
double legendre_oracle(int n, double x) {
  if (n == 0) return 1.0;
  if (n == 1) return x;
  return ((2 * n - 1) * x * legendre_oracle(n - 1, x) - (n - 1) * legendre_oracle(n - 2, x)) /
         n;
}

}  // namespace

TEST_CASE("multi-index linearization round-trips in mixed radix") {
  multi_index_set iset(3, 4);
  CHECK(iset.size() == 125);
  for (std::size_t i = 0; i < iset.size(); ++i) {
    const auto kappa = iset.decode(i);
    CHECK(iset.encode(kappa) == i);
  }
  // Little-endian base (J+1): kappa = (1, 2, 0) -> 1 + 2*5 = 11.
  const std::vector<int> kappa{1, 2, 0};
  CHECK(iset.encode(kappa) == 11);
  CHECK(multi_index_set(2, 0).size() == 1);
  CHECK_THROWS_AS(iset.encode(std::vector<int>{1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(iset.encode(std::vector<int>{1, 2, 5}), std::out_of_range);
}

TEST_CASE("orthonormal Legendre values") {
  CHECK(eval_legendre_orthonormal(0, 0.3) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval_legendre_orthonormal(1, 0.5) ==
        doctest::Approx(std::sqrt(3.0) * 0.5).epsilon(1e-14));
  // P_2(1) = 1, orthonormal scaling sqrt(5).
  CHECK(eval_legendre_orthonormal(2, 1.0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
  for (int n = 0; n <= 12; ++n)
    for (double x : {-1.0, -0.71, 0.0, 0.4, 0.93, 1.0})
      CHECK(eval_legendre_orthonormal(n, x) ==
            doctest::Approx(std::sqrt(2.0 * n + 1.0) * legendre_oracle(n, x)).epsilon(1e-12));
  CHECK_THROWS_AS(eval_legendre_orthonormal(-1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(eval_legendre_orthonormal(1000, 0.0), std::invalid_argument);
}

TEST_CASE("tensor basis evaluation") {
  pc_basis basis(multi_index_set(3, 2));
  const std::vector<double> xi{0.1, -0.2, 0.9};
  CHECK(basis.eval(std::vector<int>{0, 0, 0}, xi) == doctest::Approx(1.0));

  pc_basis basis2(multi_index_set(2, 1));
  CHECK(basis2.eval(std::vector<int>{1, 0}, std::vector<double>{0.5, 0.7}) ==
        doctest::Approx(std::sqrt(3.0) * 0.5).epsilon(1e-14));
  CHECK(basis2.eval(std::vector<int>{1, 1}, std::vector<double>{0.5, 0.5}) ==
        doctest::Approx(0.75).epsilon(1e-14));
  CHECK_THROWS_AS(basis2.eval(std::vector<int>{1, 0}, std::vector<double>{0.5}),
                  std::invalid_argument);
}

TEST_CASE("orthonormality to 1e-12 for n <= 3, J <= 8") {
  // The tensor quadrature factorizes over dimensions, so the multivariate
  // Gram entries are products of 1D integrals; check the 1D factors at full
  // degree and a full multivariate Gram at moderate size.
  const int J = 8;
  const gauss_rule& g = gauss_legendre(J + 4);
  double worst = 0.0;
  for (int i = 0; i <= J; ++i)
    for (int j = 0; j <= J; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < g.nodes.size(); ++k)
        acc += 0.5 * g.weights[k] * eval_legendre_orthonormal(i, g.nodes[k]) *
               eval_legendre_orthonormal(j, g.nodes[k]);
      worst = std::max(worst, std::abs(acc - (i == j ? 1.0 : 0.0)));
    }
  CHECK(worst < 1e-12);

  pc_basis basis(multi_index_set(3, 2));
  const Eigen::MatrixXd S = basis.gram_matrix([](std::span<const double>) { return 1.0; });
  CHECK((S - Eigen::MatrixXd::Identity(27, 27)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gram matrix of g(xi) = xi against the analytic integrals") {
  pc_basis basis(multi_index_set(1, 1));
  const Eigen::MatrixXd S = basis.gram_matrix([](std::span<const double> xi) { return xi[0]; });
  const double c = 1.0 / std::sqrt(3.0);
  CHECK(S(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(S(1, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(S(0, 1) == doctest::Approx(c).epsilon(1e-14));
  CHECK(S(1, 0) == doctest::Approx(c).epsilon(1e-14));
}

TEST_CASE("gram matrix positive definite for positive weights") {
  pc_basis basis(multi_index_set(1, 2));
  const Eigen::MatrixXd S =
      basis.gram_matrix([](std::span<const double> xi) { return 1.0 / (xi[0] + 2.0); });
  CHECK((S - S.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  // Cross-check one entry against a high-order quadrature oracle.
  const gauss_rule& g = gauss_legendre(64);
  double s01 = 0.0;
  for (std::size_t k = 0; k < g.nodes.size(); ++k)
    s01 += 0.5 * g.weights[k] * eval_legendre_orthonormal(0, g.nodes[k]) *
           eval_legendre_orthonormal(1, g.nodes[k]) / (g.nodes[k] + 2.0);
  CHECK(S(0, 1) == doctest::Approx(s01).epsilon(1e-12));
}

TEST_CASE("gram matrix rejects non-finite integrands") {
  pc_basis basis(multi_index_set(1, 1));
  CHECK_THROWS_AS(
      basis.gram_matrix([](std::span<const double> xi) { return 1.0 / (xi[0] - xi[0]); }),
      std::runtime_error);
}

TEST_CASE("mean and variance extraction") {
  Eigen::MatrixXd modes(1, 1);
  modes << 2.0;
  CHECK(pc_mean(modes)[0] == 2.0);
  CHECK(pc_variance(modes)[0] == 0.0);

  Eigen::MatrixXd m2(2, 1);
  m2 << 1.0, 3.0;
  CHECK(pc_mean(m2)[0] == 1.0);
  CHECK(pc_variance(m2)[0] == 9.0);

  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(4, 3);
  CHECK(pc_mean(z).cwiseAbs().maxCoeff() == 0.0);
  CHECK(pc_variance(z).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample expansion") {
  pc_basis basis(multi_index_set(1, 1));
  Eigen::MatrixXd modes(2, 1);
  const double a = 0.7, b = -1.3;
  modes << a, b;
  CHECK(sample_expansion(basis, modes, std::vector<double>{0.0})[0] ==
        doctest::Approx(a).epsilon(1e-15));
  CHECK(sample_expansion(basis, modes, std::vector<double>{1.0})[0] ==
        doctest::Approx(a + std::sqrt(3.0) * b).epsilon(1e-14));

  // Mode-0-only expansions are constant in xi.
  Eigen::MatrixXd m0 = Eigen::MatrixXd::Zero(2, 3);
  m0.row(0) << 1.0, -2.0, 0.5;
  for (double xi : {-0.9, 0.2, 0.8}) {
    const Eigen::VectorXd v = sample_expansion(basis, m0, std::vector<double>{xi});
    CHECK((v.transpose() - m0.row(0)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("sample expansion is linear in the modes") {
  pc_basis basis(multi_index_set(2, 2));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd ma = Eigen::MatrixXd::NullaryExpr(9, 4, [&]() { return u(rng); });
  Eigen::MatrixXd mb = Eigen::MatrixXd::NullaryExpr(9, 4, [&]() { return u(rng); });
  for (int rep = 0; rep < 10; ++rep) {
    const std::vector<double> xi{u(rng), u(rng)};
    const double c1 = u(rng), c2 = u(rng);
    const Eigen::VectorXd lhs = sample_expansion(basis, c1 * ma + c2 * mb, xi);
    const Eigen::VectorXd rhs =
        c1 * sample_expansion(basis, ma, xi) + c2 * sample_expansion(basis, mb, xi);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("monte carlo mean of an expansion converges to mode zero") {
  pc_basis basis(multi_index_set(2, 3));
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd modes = Eigen::MatrixXd::NullaryExpr(16, 1, [&]() { return u(rng); });

  const std::size_t N = 200000;
  double acc = 0.0, acc2 = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const std::vector<double> xi{u(rng), u(rng)};
    const double v = sample_expansion(basis, modes, xi)[0];
    acc += v;
    acc2 += v * v;
  }
  const double mean = acc / N;
  const double sd = std::sqrt((acc2 / N - mean * mean) / N);
  CHECK(std::abs(mean - modes(0, 0)) < 3.0 * sd + 1e-12);
}
