#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ksig/linalg.hpp"
#include "ksig/sampling.hpp"
#include "ksig/symcone.hpp"
#include "oracles.hpp"

using namespace ksig;

namespace {

std::vector<double> vec(std::initializer_list<double> v) { return v; }

double sigma(std::initializer_list<double> v, int k) {
  const auto x = vec(v);
  return elementary_symmetric(std::span<const double>(x), k);
}

SymTensor diag(std::initializer_list<double> v) {
  const auto x = vec(v);
  return SymTensor::diagonal(std::span<const double>(x));
}

}  // namespace

TEST(ElementarySymmetric, SmallExamples) {
  EXPECT_EQ(sigma({1, 1, 1}, 2), 3.0);
  EXPECT_EQ(sigma({2, 2, 2}, 3), 8.0);
  EXPECT_EQ(sigma({1, 2, 3}, 2), oracle::sigma_subsets({1, 2, 3}, 2));
  EXPECT_EQ(sigma({1, 2, 3}, 2), 11.0);
  EXPECT_EQ(sigma({-4, 7, 0.5}, 0), 1.0);
}

TEST(ElementarySymmetric, RejectsOrderOutOfRange) {
  EXPECT_THROW((void)sigma({1, 2, 3}, 4), DomainError);
  EXPECT_THROW((void)sigma({1, 2, 3}, -1), DomainError);
}

TEST(ElementarySymmetric, MatchesSubsetEnumeration) {
  CounterRng rng(7);
  for (int n = 3; n <= 5; ++n) {
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> lambda(static_cast<std::size_t>(n));
      for (auto& v : lambda) v = rng.uniform(-3.0, 3.0);
      for (int k = 0; k <= n; ++k) {
        const double ref = oracle::sigma_subsets(lambda, k);
        EXPECT_NEAR(elementary_symmetric(std::span<const double>(lambda), k), ref,
                    1e-13 * std::max(1.0, oracle::sigma_abs(lambda, k)));
      }
    }
  }
}

TEST(SymmetricTensor, PackedLayoutAndSymmetry) {
  SymTensor m(3);
  m(0, 1) = 2.0;
  EXPECT_EQ(m(1, 0), 2.0);
  EXPECT_EQ(SymTensor::packed_size(5), 15);
  const std::vector<double> dense{1, 2, 3, 2, 4, 5, 3, 5, 6};
  const auto d = SymTensor::from_dense(3, dense);
  const auto p = SymTensor::from_packed(3, d.packed());
  EXPECT_EQ(d, p);
  EXPECT_EQ(p(2, 1), 5.0);
  EXPECT_EQ(d.trace(), 11.0);
  EXPECT_THROW(SymTensor(6), DomainError);
  EXPECT_THROW(SymTensor(0), DomainError);
}

TEST(SigmaOfMatrix, Examples) {
  EXPECT_DOUBLE_EQ(sigma_of_matrix(diag({1, 2, 3}), 2), 11.0);
  EXPECT_DOUBLE_EQ(sigma_of_matrix(SymTensor::identity(4), 2), 6.0);
  EXPECT_EQ(sigma_of_matrix(SymTensor::identity(4), 0), 1.0);
}

TEST(SigmaOfMatrix, OrthogonalInvariance) {
  CounterRng rng(11);
  for (int n = 3; n <= 5; ++n) {
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> lambda(static_cast<std::size_t>(n));
      for (auto& v : lambda) v = rng.uniform(-2.0, 3.0);
      const auto m = conjugate_diagonal(random_orthogonal(n, rng), lambda);
      for (int k = 0; k <= n; ++k) {
        const double ref = oracle::sigma_subsets(lambda, k);
        const double scale = std::max(1.0, oracle::sigma_abs(lambda, k));
        EXPECT_LE(std::abs(sigma_of_matrix(m, k) - ref) / scale, 1e-12) << "n=" << n << " k=" << k;
        EXPECT_LE(std::abs(oracle::sigma_eigen(to_eigen(m), k) - ref) / scale, 1e-12);
      }
    }
  }
}

TEST(NewtonTransform, IdentityCases) {
  CounterRng rng(3);
  const auto m = sample_cone_matrix(4, 2, rng);
  EXPECT_EQ(newton_transform(m, 0), SymTensor::identity(4));
  for (int n = 3; n <= 5; ++n) {
    for (int k = 1; k <= n; ++k) {
      const auto t = newton_transform(SymTensor::identity(n), k - 1);
      const double c = binomial(n - 1, k - 1);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) EXPECT_NEAR(t(i, j), i == j ? c : 0.0, 1e-12);
    }
  }
  EXPECT_THROW((void)newton_transform(SymTensor::identity(3), 3), DomainError);
}

TEST(NewtonTransform, TraceIdentitiesAndPolynomialForm) {
  CounterRng rng(5);
  for (int n = 3; n <= 5; ++n) {
    for (int trial = 0; trial < 50; ++trial) {
      SymTensor m(n);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
      const auto em = to_eigen(m);
      for (int k = 1; k <= n; ++k) {
        const auto t = newton_transform(m, k - 1);
        const double sk = oracle::sigma_eigen(em, k);
        const double sk1 = oracle::sigma_eigen(em, k - 1);
        EXPECT_NEAR(t.contract(m), k * sk, 1e-10);
        EXPECT_NEAR(t.trace(), (n - k + 1) * sk1, 1e-10);
        const auto poly = oracle::newton_transform_polynomial(em, k - 1);
        EXPECT_LE((to_eigen(t) - poly).cwiseAbs().maxCoeff(), 1e-10);
      }
    }
  }
}

TEST(GammaCone, Examples) {
  for (int n = 3; n <= 5; ++n) {
    const std::vector<double> e(static_cast<std::size_t>(n), 1.0);
    for (int k = 1; k <= n; ++k) EXPECT_TRUE(in_gamma_cone(e, k));
  }
  const auto v = vec({-1, 5, 5});
  EXPECT_EQ(sigma({-1, 5, 5}, 1), 9.0);
  EXPECT_EQ(sigma({-1, 5, 5}, 2), 15.0);
  EXPECT_EQ(sigma({-1, 5, 5}, 3), -25.0);
  EXPECT_TRUE(in_gamma_cone(v, 2));
  EXPECT_FALSE(in_gamma_cone(v, 3));
  const auto z = vec({0, 0, 0});
  for (int k = 1; k <= 3; ++k) EXPECT_FALSE(in_gamma_cone(z, k));
  EXPECT_TRUE(in_gamma_cone(diag({-1, 5, 5}), 2));
  const auto e3 = vec({1, 1, 1});
  EXPECT_TRUE(in_gamma_cone(e3, 3, 0.5));
  EXPECT_FALSE(in_gamma_cone(e3, 3, 1.0));
  EXPECT_DOUBLE_EQ(cone_margin(std::span<const double>(e3), 3), 1.0);
}

TEST(GammaCone, NestingOnRandomVectors) {
  CounterRng rng(13);
  for (int trial = 0; trial < 5000; ++trial) {
    const int n = 3 + trial % 3;
    std::vector<double> lambda(static_cast<std::size_t>(n));
    for (auto& v : lambda) v = rng.uniform(-1.0, 2.0);
    for (int k = 1; k <= n; ++k) {
      if (!in_gamma_cone(lambda, k)) continue;
      for (int j = 1; j < k; ++j) EXPECT_TRUE(in_gamma_cone(lambda, j));
    }
  }
}

TEST(GammaCone, Gamma2Pinching) {
  CounterRng rng(17);
  for (int trial = 0; trial < 5000; ++trial) {
    const int n = 3 + trial % 3;
    const auto lambda = sample_cone_eigenvalues(n, 2, rng);
    const double s1 = elementary_symmetric(std::span<const double>(lambda), 1);
    for (double v : lambda) EXPECT_LT(std::abs(v), s1);
  }
}

TEST(HomotopyConstant, Examples) {
  EXPECT_DOUBLE_EQ(homotopy_constant(3, 3), 0.25);
  EXPECT_DOUBLE_EQ(homotopy_constant(4, 3), 0.8);
  EXPECT_DOUBLE_EQ(homotopy_constant(5, 4), 5.0 / 16.0);
  EXPECT_THROW((void)homotopy_constant(3, 2), DomainError);
  EXPECT_THROW((void)homotopy_constant(3, 4), DomainError);
}

TEST(HomotopyConstant, BalancesTheIdentity) {
  for (int n = 3; n <= 5; ++n) {
    for (int k = 3; k <= n; ++k) {
      const double c = homotopy_constant(n, k);
      const std::vector<double> beta(static_cast<std::size_t>(k - 1), c);
      EXPECT_NEAR(operator_G(SymTensor::identity(n), k, beta), 0.0, 1e-14) << n << " " << k;
    }
  }
}

TEST(NewtonMaclaurin, ConstantExamples) {
  EXPECT_DOUBLE_EQ(newton_maclaurin_constant(3, 3, 1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(newton_maclaurin_constant(3, 3, 0), 1.0 / 27.0);
}

TEST(NewtonMaclaurin, EqualityAtOnesAndBoundOnCone) {
  CounterRng rng(19);
  for (int n = 3; n <= 5; ++n) {
    for (int k = 3; k <= n; ++k) {
      const std::vector<double> e(static_cast<std::size_t>(n), 1.0);
      const auto s = elementary_symmetric_all(std::span<const double>(e));
      for (int l = 0; l <= k - 2; ++l) {
        const double rhs = newton_maclaurin_constant(n, k, l) * std::pow(s[k - 1] / s[k], k - 1 - l);
        EXPECT_NEAR(s[l] / s[k - 1], rhs, 1e-15 * rhs);
      }
      for (int trial = 0; trial < 500; ++trial) {
        const auto lambda = sample_cone_eigenvalues(n, k, rng);
        const auto sl = elementary_symmetric_all(std::span<const double>(lambda));
        for (int l = 0; l <= k - 2; ++l) {
          const double lhs = sl[l] / sl[k - 1];
          const double rhs = newton_maclaurin_constant(n, k, l) * std::pow(sl[k - 1] / sl[k], k - 1 - l);
          EXPECT_LE(lhs, rhs * (1 + 1e-12));
        }
      }
    }
  }
}

TEST(OperatorG, Examples) {
  const std::vector<double> c(2, 0.25);
  const std::vector<double> zero(2, 0.0);
  EXPECT_NEAR(operator_G(SymTensor::identity(3), 3, c), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(operator_G(SymTensor::identity(3), 3, zero), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(operator_G(diag({2, 1, 1}), 2, std::vector<double>{0.0}), 5.0 / 4.0);
}

TEST(OperatorG, InadmissibleStateCarriesFailingSigma) {
  const std::vector<double> zero(2, 0.0);
  try {
    (void)operator_G(diag({-1, -1, 1}), 3, zero);
    FAIL() << "expected InadmissibleState";
  } catch (const InadmissibleState& e) {
    EXPECT_EQ(e.failing_order(), 1);
    EXPECT_DOUBLE_EQ(e.failing_value(), -1.0);
  }
  try {
    (void)operator_G(diag({-1, 5, 5}), 3, zero);  // in Gamma_2, fine
  } catch (...) {
    FAIL() << "Gamma_2 matrix rejected";
  }
  try {
    (void)operator_G(diag({-3, 2, 2}), 3, zero);  // sigma_1 = 1, sigma_2 = -8
    FAIL() << "expected InadmissibleState";
  } catch (const InadmissibleState& e) {
    EXPECT_EQ(e.failing_order(), 2);
    EXPECT_DOUBLE_EQ(e.failing_value(), -8.0);
  }
  EXPECT_THROW((void)operator_G(SymTensor::identity(3), 3, std::vector<double>{1.0, -0.1}), DomainError);
  EXPECT_THROW((void)operator_G(SymTensor::identity(3), 3, std::vector<double>{1.0}), DomainError);
}

TEST(GradG, AtIdentity) {
  for (int n = 3; n <= 5; ++n) {
    for (int k = 3; k <= n; ++k) {
      const std::vector<double> zero(static_cast<std::size_t>(k - 1), 0.0);
      const auto g = grad_G(SymTensor::identity(n), k, zero);
      EXPECT_GT(g(0, 0), 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) EXPECT_NEAR(g(i, j), i == j ? g(0, 0) : 0.0, 1e-15);
      EXPECT_GE(g.trace(), static_cast<double>(n - k + 1) / k - 1e-14);
    }
  }
  // (3*3 - 1*6)/9 summed over the three eigenvalues.
  const auto g = grad_G(SymTensor::identity(3), 3, std::vector<double>{0.0, 0.0});
  EXPECT_NEAR(g.trace(), 1.0 / 3.0, 1e-15);
}

namespace {

// Directional central difference of operator_G along a unit symmetric direction.
double fd_entry(const SymTensor& m, int k, const std::vector<double>& beta, int i, int j, double eps) {
  SymTensor p = m, q = m;
  p(i, j) += eps;
  q(i, j) -= eps;
  return (operator_G(p, k, beta) - operator_G(q, k, beta)) / (2 * eps);
}

}  // namespace

TEST(GradG, MatchesFiniteDifferences) {
  CounterRng rng(23);
  for (int n = 3; n <= 5; ++n) {
    for (int k = 3; k <= n; ++k) {
      for (int trial = 0; trial < 40; ++trial) {
        const auto m = sample_cone_matrix(n, k - 1, rng);
        std::vector<double> beta(static_cast<std::size_t>(k - 1));
        for (auto& b : beta) b = rng.uniform(0.0, 2.0);
        const auto g = grad_G(m, k, beta);
        const double eps = 1e-6 * std::max(1.0, m.max_abs());
        double err = 0.0, scale = 0.0;
        for (int i = 0; i < n; ++i) {
          for (int j = i; j < n; ++j) {
            // Packed entry (i, j) with i != j moves both M_ij and M_ji.
            const double analytic = i == j ? g(i, j) : 2.0 * g(i, j);
            const double fd = fd_entry(m, k, beta, i, j, eps);
            err = std::max(err, std::abs(fd - analytic));
            scale = std::max(scale, std::abs(analytic));
          }
        }
        EXPECT_LE(err, 1e-6 * std::max(scale, 1.0)) << "n=" << n << " k=" << k;
      }
    }
  }
}

TEST(GradG, PositiveDefiniteAndTraceBoundOnCone) {
  CounterRng rng(29);
  for (int n = 3; n <= 5; ++n) {
    for (int k = 3; k <= n; ++k) {
      for (int trial = 0; trial < 300; ++trial) {
        const auto m = sample_cone_matrix(n, k - 1, rng, 0.1);
        std::vector<double> beta(static_cast<std::size_t>(k - 1));
        for (auto& b : beta) b = rng.uniform(0.0, 2.0);
        EXPECT_GT(min_eigenvalue(grad_G(m, k, beta)), 0.0);
        const std::vector<double> zero(static_cast<std::size_t>(k - 1), 0.0);
        EXPECT_GE(grad_G(m, k, zero).trace(), static_cast<double>(n - k + 1) / k - 1e-10);
      }
    }
  }
}

TEST(GradG, EulerIdentity) {
  CounterRng rng(31);
  for (int n = 3; n <= 5; ++n) {
    for (int k = 3; k <= n; ++k) {
      for (int trial = 0; trial < 200; ++trial) {
        const auto m = sample_cone_matrix(n, k - 1, rng);
        const std::vector<double> zero(static_cast<std::size_t>(k - 1), 0.0);
        const double g = operator_G(m, k, zero);
        EXPECT_NEAR(grad_G(m, k, zero).contract(m), g, 1e-11 * std::max(1.0, std::abs(g)));
      }
    }
  }
}

// Concavity of G in M for fixed beta >= 0: the finite-difference Hessian
// along random symmetric directions is non-positive up to stencil error.
TEST(OperatorG, FiniteDifferenceHessianIsNegativeSemidefinite) {
  CounterRng rng(37);
  for (int n = 3; n <= 5; ++n) {
    for (int k = 3; k <= n; ++k) {
      for (int trial = 0; trial < 40; ++trial) {
        const auto m = sample_cone_matrix(n, k - 1, rng);
        std::vector<double> beta(static_cast<std::size_t>(k - 1));
        for (auto& b : beta) b = rng.uniform(0.0, 2.0);
        const int p = SymTensor::packed_size(n);
        const double h = 1e-4 * std::max(1.0, m.max_abs());
        // Basis of symmetric matrices: E_ii and (E_ij + E_ji)/sqrt(2).
        std::vector<SymTensor> basis;
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            SymTensor b(n);
            b(i, j) = i == j ? 1.0 : 1.0 / std::sqrt(2.0);
            basis.push_back(b);
          }
        auto f = [&](const SymTensor& x) { return operator_G(x, k, beta); };
        const double f0 = f(m);
        Eigen::MatrixXd hess(p, p);
        for (int a = 0; a < p; ++a) {
          for (int b = a; b < p; ++b) {
            const auto da = h * basis[a];
            const auto db = h * basis[b];
            const double v = (f(m + da + db) - f(m + da - db) - f(m - da + db) + f(m - da - db)) / (4 * h * h);
            hess(a, b) = hess(b, a) = v;
          }
        }
        (void)f0;
        const auto ev = oracle::eigenvalues(hess);
        const double scale = std::max(1.0, hess.cwiseAbs().maxCoeff());
        EXPECT_LE(ev.back(), 1e-6 * scale) << "n=" << n << " k=" << k;
      }
    }
  }
}

TEST(Quotient, PsdMonotonicityAndConcavity) {
  CounterRng rng(41);
  for (int n = 3; n <= 5; ++n) {
    for (int k = 3; k <= n; ++k) {
      const std::vector<double> zero(static_cast<std::size_t>(k - 1), 0.0);
      auto f = [&](const SymTensor& m) { return operator_G(m, k, zero); };
      for (int trial = 0; trial < 300; ++trial) {
        const auto b = sample_cone_matrix(n, k - 1, rng);
        const auto a = sample_psd(n, rng);
        const auto q = sample_cone_matrix(n, k - 1, rng);
        EXPECT_GE(f(a + b), f(b) - 1e-10 * std::max(1.0, std::abs(f(b))));
        const auto mid = 0.5 * (b + q);
        EXPECT_GE(f(mid), 0.5 * (f(b) + f(q)) - 1e-10 * std::max(1.0, std::abs(f(mid))));
        EXPECT_GE(f(b + q), f(b) + f(q) - 1e-10 * std::max(1.0, std::abs(f(b + q))));
      }
    }
  }
}
