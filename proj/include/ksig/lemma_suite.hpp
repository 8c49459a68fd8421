#pragma once

// Randomised verification of the algebraic inequalities behind the a priori
// estimates: monotonicity of sigma quotients under semi-definite
// perturbations, concavity of sigma_k/sigma_{k-1} on Gamma_{k-1}, the
// Newton-MacLaurin bound with its explicit constant, Gamma_2 pinching,
// ellipticity of G and the trace bound.
//
// Violations are reported relative: (amount by which the inequality fails) /
// max(1, |lhs|, |rhs|). Failures are results, not exceptions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ksig/linalg.hpp"
#include "ksig/sampling.hpp"
#include "ksig/symcone.hpp"

namespace ksig {

struct PropertyResult {
  std::string name;
  std::string statement;
  long samples = 0;
  long skipped = 0;
  double max_violation = 0.0;
  bool passed = true;
};

struct LemmaSuiteResult {
  int n = 0;
  int k = 0;
  long samples = 0;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  double boundary_fraction = 0.0;
  double equality_slack_at_e = 0.0;  // Newton-MacLaurin at lambda = e
  std::vector<PropertyResult> properties;

  [[nodiscard]] bool passed() const {
    return std::all_of(properties.begin(), properties.end(), [](const auto& p) { return p.passed; });
  }
};

namespace detail {

inline double relative_excess(double lhs_should_be_le, double rhs) {
  return (lhs_should_be_le - rhs) / std::max({1.0, std::abs(lhs_should_be_le), std::abs(rhs)});
}

class PropertyTracker {
 public:
  PropertyTracker(std::string name, std::string statement) { result_.name = std::move(name); result_.statement = std::move(statement); }
  void record(double violation) {
    ++result_.samples;
    result_.max_violation = std::max(result_.max_violation, violation);
  }
  void skip() { ++result_.skipped; }
  PropertyResult finish(double tolerance) {
    result_.passed = result_.max_violation <= tolerance;
    return result_;
  }

 private:
  PropertyResult result_;
};

}  // namespace detail

/// Runs every property on `samples` seeded draws. Requires 3 <= k <= n <= 5.
[[nodiscard]] inline LemmaSuiteResult run_lemma_suite(int n, int k, long samples, std::uint64_t seed,
                                                      double tolerance = 1e-10, double boundary_fraction = 0.1) {
  if (n < 3 || n > kMaxDim || k < 3 || k > n) {
    throw DomainError("lemma suite needs 3 <= k <= n <= 5, got n=" + std::to_string(n) + " k=" + std::to_string(k));
  }
  if (samples < 1) throw DomainError("lemma suite needs at least one sample");

  LemmaSuiteResult out;
  out.n = n;
  out.k = k;
  out.samples = samples;
  out.seed = seed;
  out.tolerance = tolerance;
  out.boundary_fraction = boundary_fraction;

  using detail::PropertyTracker;
  using detail::relative_excess;
  PropertyTracker consistency("sigma_matrix_vs_eigenvalues", "sigma_j(R diag(lambda) R^T) = sigma_j(lambda)");
  PropertyTracker nesting("cone_nesting", "lambda in Gamma_k implies lambda in Gamma_j, j < k");
  PropertyTracker psd_ratio("psd_monotone_quotient", "A >= 0: sigma_k/sigma_{k-1}(A+B) >= sigma_k/sigma_{k-1}(B)");
  PropertyTracker psd_power("psd_monotone_power",
                            "A >= 0: (sigma_{k-1}/sigma_l)^{1/(k-1-l)}(A+B) >= same(B), l < k-1");
  PropertyTracker nsd_ratio("nsd_monotone_quotient", "A <= 0: sigma_k/sigma_{k-1}(A+B) <= sigma_k/sigma_{k-1}(B)");
  PropertyTracker nsd_power("nsd_monotone_power",
                            "A <= 0: (sigma_{k-1}/sigma_l)^{1/(k-1-l)}(A+B) <= same(B), l < k-1");
  PropertyTracker midpoint("quotient_midpoint_concavity", "f((P+Q)/2) >= (f(P)+f(Q))/2, f = sigma_k/sigma_{k-1}");
  PropertyTracker superadd("quotient_superadditivity", "f(P+Q) >= f(P)+f(Q), f = sigma_k/sigma_{k-1}");
  PropertyTracker maclaurin("newton_maclaurin",
                            "sigma_l/sigma_{k-1} <= C(n,k,l) (sigma_{k-1}/sigma_k)^{k-1-l} on Gamma_k");
  PropertyTracker pinching("gamma2_pinching", "lambda in Gamma_2: max(|lambda_i|, |M_ij|) < sigma_1");
  PropertyTracker elliptic("elliptic_positive_definite", "beta >= 0, lambda in Gamma_{k-1}: G^{ij} > 0");
  PropertyTracker trace("trace_bound", "sum_i d(sigma_k/sigma_{k-1})/d lambda_i >= (n-k+1)/k on Gamma_{k-1}");
  PropertyTracker euler("euler_identity", "G_k^{ij} M_ij = G_k (degree-one homogeneity)");

  CounterRng rng(seed);
  auto quotient = [k](const SymTensor& m) {
    const auto ex = newton_expansion(m, k);
    return ex.sigma[k] / ex.sigma[k - 1];
  };
  auto power_ratio = [k](const SymTensor& m, int l) {
    const auto ex = newton_expansion(m, k - 1);
    return std::pow(ex.sigma[k - 1] / ex.sigma[l], 1.0 / (k - 1 - l));
  };
  auto draw = [&](int order, bool allow_boundary) {
    const bool boundary = allow_boundary && rng.uniform() < boundary_fraction;
    auto lambda = boundary ? sample_cone_boundary(n, order, rng) : sample_cone_eigenvalues(n, order, rng);
    return std::pair{lambda, conjugate_diagonal(random_orthogonal(n, rng), lambda)};
  };

  const std::vector<double> zero_beta(static_cast<std::size_t>(k - 1), 0.0);
  const double trace_bound = static_cast<double>(n - k + 1) / k;

  for (long s = 0; s < samples; ++s) {
    // Matrix path against eigenvalue path.
    {
      const auto [lambda, m] = draw(k - 1, true);
      const auto ex = newton_expansion(m, n);
      std::vector<double> abs_lambda(lambda.size());
      std::transform(lambda.begin(), lambda.end(), abs_lambda.begin(), [](double v) { return std::abs(v); });
      double worst = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double ref = elementary_symmetric(std::span<const double>(lambda), j);
        const double scale = std::max(1.0, elementary_symmetric(std::span<const double>(abs_lambda), j));
        worst = std::max(worst, std::abs(ex.sigma[j] - ref) / scale);
      }
      consistency.record(worst);
    }

    // Cone nesting on unrestricted vectors.
    {
      std::vector<double> lambda(static_cast<std::size_t>(n));
      for (auto& v : lambda) v = rng.uniform(-1.0, 2.0);
      bool broken = false;
      for (int kk = 1; kk <= n; ++kk) {
        if (!in_gamma_cone(std::span<const double>(lambda), kk)) continue;
        for (int j = 1; j < kk; ++j) broken |= !in_gamma_cone(std::span<const double>(lambda), j);
      }
      nesting.record(broken ? 1.0 : 0.0);
    }

    const auto [lambda_b, b] = draw(k - 1, true);
    const auto a_psd = sample_psd(n, rng);

    // Adding a positive semi-definite A.
    {
      const auto sum = a_psd + b;
      if (cone_margin(sum, k - 1) > kBoundarySkip) {
        psd_ratio.record(relative_excess(quotient(b), quotient(sum)));
        double worst = -std::numeric_limits<double>::infinity();
        for (int l = 0; l < k - 1; ++l) worst = std::max(worst, relative_excess(power_ratio(b, l), power_ratio(sum, l)));
        psd_power.record(worst);
      } else {
        psd_ratio.skip();
        psd_power.skip();
      }
    }

    // Adding a negative semi-definite A, shrunk until A + B stays in the cone.
    {
      double theta = rng.uniform(0.0, 1.0);
      bool found = false;
      SymTensor sum;
      for (int attempt = 0; attempt < 20 && !found; ++attempt, theta *= 0.5) {
        sum = b - theta * a_psd;
        found = cone_margin(sum, k - 1) > kBoundarySkip;
      }
      if (found) {
        nsd_ratio.record(relative_excess(quotient(sum), quotient(b)));
        double worst = -std::numeric_limits<double>::infinity();
        for (int l = 0; l < k - 1; ++l) worst = std::max(worst, relative_excess(power_ratio(sum, l), power_ratio(b, l)));
        nsd_power.record(worst);
      } else {
        nsd_ratio.skip();
        nsd_power.skip();
      }
    }

    // Concavity of sigma_k/sigma_{k-1} on Gamma_{k-1}.
    {
      const auto [lambda_p, p] = draw(k - 1, true);
      const auto mid = 0.5 * (p + b);
      midpoint.record(relative_excess(0.5 * (quotient(p) + quotient(b)), quotient(mid)));
      superadd.record(relative_excess(quotient(p) + quotient(b), quotient(p + b)));
    }

    // Newton-MacLaurin with explicit constant on Gamma_k.
    {
      const auto [lambda_k, m] = draw(k, true);
      const auto ex = newton_expansion(m, k);
      double worst = -std::numeric_limits<double>::infinity();
      for (int l = 0; l <= k - 2; ++l) {
        const double lhs = ex.sigma[l] / ex.sigma[k - 1];
        const double rhs = newton_maclaurin_constant(n, k, l) * std::pow(ex.sigma[k - 1] / ex.sigma[k], k - 1 - l);
        worst = std::max(worst, relative_excess(lhs, rhs));
      }
      maclaurin.record(worst);
    }

    // Gamma_2 pinching.
    {
      const auto [lambda2, m] = draw(2, true);
      double biggest = 0.0;
      for (double v : lambda2) biggest = std::max(biggest, std::abs(v));
      biggest = std::max(biggest, m.max_abs());
      const double s1 = elementary_symmetric(std::span<const double>(lambda2), 1);
      pinching.record(relative_excess(biggest, s1));
    }

    // Ellipticity, trace bound, Euler identity.
    {
      std::vector<double> beta(static_cast<std::size_t>(k - 1));
      for (auto& v : beta) v = rng.uniform(0.0, 2.0);
      const auto q = evaluate_quotient(b, k, std::span<const double>(beta), true);
      const auto ev = eigenvalues(q.grad);
      const double scale = std::max({1.0, std::abs(ev.front()), std::abs(ev.back())});
      elliptic.record(-ev.front() / scale);

      const auto q0 = evaluate_quotient(b, k, std::span<const double>(zero_beta), true);
      trace.record(relative_excess(trace_bound, q0.grad_leading.trace()));
      // The gradient carries a 1/sigma_{k-1}^2; compare numerators against
      // the size of the terms that cancel in them.
      const auto ex = newton_expansion(b, k);
      const double s1 = ex.sigma[k - 1];
      const double frob_b = std::sqrt(b.contract(b));
      const double size = s1 * std::sqrt(ex.transform[k - 1].contract(ex.transform[k - 1])) * frob_b +
                          std::abs(ex.sigma[k]) * std::sqrt(ex.transform[k - 2].contract(ex.transform[k - 2])) * frob_b;
      const double lhs = q0.grad_leading.contract(b);
      euler.record(std::abs(lhs - q0.leading) * s1 * s1 / std::max(size, std::numeric_limits<double>::min()));
    }
  }

  // Equality case of Newton-MacLaurin at e.
  {
    const auto e = SymTensor::identity(n);
    const auto ex = newton_expansion(e, k);
    double worst = 0.0;
    for (int l = 0; l <= k - 2; ++l) {
      const double lhs = ex.sigma[l] / ex.sigma[k - 1];
      const double rhs = newton_maclaurin_constant(n, k, l) * std::pow(ex.sigma[k - 1] / ex.sigma[k], k - 1 - l);
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
      maclaurin.record(relative_excess(lhs, rhs));
    }
    out.equality_slack_at_e = worst;
  }

  for (auto* p : {&consistency, &nesting, &psd_ratio, &psd_power, &nsd_ratio, &nsd_power, &midpoint, &superadd,
                  &maclaurin, &pinching, &elliptic, &trace, &euler}) {
    out.properties.push_back(p->finish(tolerance));
  }
  return out;
}

[[nodiscard]] inline nlohmann::ordered_json to_json(const LemmaSuiteResult& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["k"] = r.k;
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  j["tolerance"] = r.tolerance;
  j["boundary_fraction"] = r.boundary_fraction;
  j["rng"] = "counter-splitmix64";
  j["equality_slack_at_e"] = r.equality_slack_at_e;
  j["passed"] = r.passed();
  auto& props = j["properties"] = nlohmann::ordered_json::array();
  for (const auto& p : r.properties) {
    props.push_back({{"name", p.name},
                     {"statement", p.statement},
                     {"samples", p.samples},
                     {"skipped", p.skipped},
                     {"max_violation", p.max_violation},
                     {"passed", p.passed}});
  }
  return j;
}

}  // namespace ksig
