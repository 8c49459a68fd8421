#pragma once

// Small dense helpers on top of Eigen for eigenvalues and conjugation.

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "ksig/symcone.hpp"

namespace ksig {

[[nodiscard]] inline Eigen::MatrixXd to_eigen(const SymTensor& m) {
  Eigen::MatrixXd out(m.dim(), m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) out(i, j) = m(i, j);
  return out;
}

[[nodiscard]] inline SymTensor from_eigen(const Eigen::MatrixXd& a) {
  SymTensor m(static_cast<int>(a.rows()));
  for (int i = 0; i < m.dim(); ++i)
    for (int j = i; j < m.dim(); ++j) m(i, j) = 0.5 * (a(i, j) + a(j, i));
  return m;
}

/// Ascending eigenvalues.
[[nodiscard]] inline std::vector<double> eigenvalues(const SymTensor& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(m), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

[[nodiscard]] inline double min_eigenvalue(const SymTensor& m) { return eigenvalues(m).front(); }

/// R diag(lambda) R^T.
[[nodiscard]] inline SymTensor conjugate_diagonal(const Eigen::MatrixXd& rotation, std::span<const double> lambda) {
  const auto d = Eigen::Map<const Eigen::VectorXd>(lambda.data(), static_cast<Eigen::Index>(lambda.size()));
  return from_eigen(rotation * d.asDiagonal() * rotation.transpose());
}

}  // namespace ksig
