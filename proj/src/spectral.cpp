#include "groupform/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

#include "groupform/errors.hpp"

namespace groupform {

Matrix jacobian(const ModelParams& params, std::span<const double> eps, const SimplexState& state,
                double h) {
  if (!(h > 0.0)) throw ConfigError("invalid_step", "finite-difference step must be positive");
  const std::size_t k = state.size();
  for (std::size_t j = 0; j < k; ++j) {
    if (state.pi[j] < 10.0 * h) {
      std::ostringstream msg;
      msg << "group " << j << " has pi = " << state.pi[j] << " < 10 h = " << 10.0 * h;
      throw NumericalError("boundary_proximity", msg.str());
    }
  }
  const auto n = static_cast<Eigen::Index>(k);
  Matrix jac(n, n);
  SimplexState plus = state, minus = state;
  for (std::size_t j = 0; j < k; ++j) {
    plus.pi[j] = state.pi[j] + h;
    minus.pi[j] = state.pi[j] - h;
    const Vector pp = choice_map(plus, params, eps);
    const Vector pm = choice_map(minus, params, eps);
    for (std::size_t i = 0; i < k; ++i) {
      jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (pp[i] - pm[i]) / (2.0 * h);
    }
    plus.pi[j] = state.pi[j];
    minus.pi[j] = state.pi[j];
  }
  return jac;
}

namespace {

std::vector<Eigen::Index> descending_real_order(const Eigen::VectorXcd& values) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (values(a).real() != values(b).real()) return values(a).real() > values(b).real();
    return values(a).imag() > values(b).imag();
  });
  return order;
}

Eigen::VectorXcd sorted(const Eigen::VectorXcd& values) {
  const auto order = descending_real_order(values);
  Eigen::VectorXcd out(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) out(i) = values(order[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

EigenDecomposition eigen_decompose(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw NumericalError("not_square", "eigendecomposition needs a nonempty square matrix");
  }
  if (m.rows() > 128) throw NumericalError("too_large", "eigendecomposition supports K <= 128");

  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "real Schur QR iteration did not converge within "
        << Eigen::RealSchur<Matrix>::m_maxIterationsPerRow * m.rows() << " iterations";
    throw NumericalError("eigen_no_convergence", msg.str());
  }
  const Eigen::VectorXcd raw_values = solver.eigenvalues();
  const Eigen::MatrixXcd raw_vectors = solver.eigenvectors();
  const auto order = descending_real_order(raw_values);

  const auto n = m.rows();
  EigenDecomposition out{Eigen::VectorXcd(n), Eigen::MatrixXcd(n, n), Eigen::VectorXd(n)};
  const Eigen::MatrixXcd mc = m.cast<std::complex<double>>();
  const double bound = 1e-8 * m.norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    out.values(i) = raw_values(src);
    Eigen::VectorXcd v = raw_vectors.col(src);
    v /= v.norm();
    out.vectors.col(i) = v;
    out.residuals(i) = (mc * v - out.values(i) * v).norm();
    if (out.residuals(i) > bound) {
      std::ostringstream msg;
      msg << "eigenpair " << i << " residual " << out.residuals(i) << " exceeds " << bound;
      throw NumericalError("eigen_residual", msg.str());
    }
  }
  return out;
}

std::string_view to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::stable_node: return "stable-node";
    case StabilityClass::unstable_node: return "unstable-node";
    case StabilityClass::stable_spiral: return "stable-spiral";
    case StabilityClass::unstable_spiral: return "unstable-spiral";
    case StabilityClass::marginal: return "marginal";
  }
  return "marginal";
}

StabilityClass classify_equilibrium(const Eigen::VectorXcd& eigenvalues,
                                    const ClassificationTolerances& tol) {
  if (eigenvalues.size() == 0) return StabilityClass::marginal;
  bool any_unstable = false, unstable_oscillating = false;
  bool all_stable = true, any_oscillating = false;
  for (const auto& lambda : eigenvalues) {
    const bool oscillating = std::abs(lambda.imag()) > tol.imag;
    any_oscillating = any_oscillating || oscillating;
    if (lambda.real() > tol.marginal) {
      any_unstable = true;
      unstable_oscillating = unstable_oscillating || oscillating;
    }
    if (!(lambda.real() < -tol.marginal)) all_stable = false;
  }
  if (any_unstable) {
    return unstable_oscillating ? StabilityClass::unstable_spiral : StabilityClass::unstable_node;
  }
  if (all_stable) return any_oscillating ? StabilityClass::stable_spiral : StabilityClass::stable_node;
  return StabilityClass::marginal;
}

Eigen::VectorXcd tangent_eigenvalues(const Matrix& m) {
  const auto n = m.rows();
  if (n < 2) return Eigen::VectorXcd(0);
  // Householder QR of the ones vector: columns 1.. of Q span its complement.
  const Eigen::HouseholderQR<Matrix> qr(Matrix::Ones(n, 1));
  const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix basis = q.rightCols(n - 1);
  const Matrix restricted = basis.transpose() * m * basis;
  Eigen::EigenSolver<Matrix> solver(restricted, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigen_no_convergence", "tangent spectrum QR iteration did not converge");
  }
  return sorted(solver.eigenvalues());
}

SpectralReport spectral_report(const ModelParams& params, std::span<const double> eps,
                               const SimplexState& state, double h,
                               const ClassificationTolerances& tol) {
  SpectralReport report;
  report.point = state;
  report.jacobian = jacobian(params, eps, state, h);
  const auto n = report.jacobian.rows();
  report.shifted = report.jacobian - Matrix::Identity(n, n);
  report.decomposition = eigen_decompose(report.shifted);

  // The normal mode is the eigenvector most aligned with (1, ..., 1).
  double best = -1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double alignment = std::abs(report.decomposition.vectors.col(i).sum()) /
                             std::sqrt(static_cast<double>(n));
    if (alignment > best) {
      best = alignment;
      report.normal_mode = i;
    }
  }
  report.tangent = tangent_eigenvalues(report.shifted);
  report.classification = classify_equilibrium(report.tangent, tol);
  return report;
}

std::vector<Vector> linearized_trajectory(const Matrix& m, std::span<const double> y0,
                                          std::span<const double> times) {
  if (static_cast<Eigen::Index>(y0.size()) != m.rows()) {
    throw NumericalError("size_mismatch", "initial perturbation length differs from matrix size");
  }
  const EigenDecomposition eig = eigen_decompose(m);
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(eig.vectors);
  const auto& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                              : std::numeric_limits<double>::infinity();
  if (!(cond <= 1e8)) {
    std::ostringstream msg;
    msg << "eigenvector matrix condition number " << cond
        << " exceeds 1e8; use a direct matrix exponential instead";
    throw NumericalError("ill_conditioned_decomposition", msg.str());
  }

  Eigen::VectorXcd y0c(m.rows());
  double scale = 1.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    y0c(i) = y0[static_cast<std::size_t>(i)];
    scale = std::max(scale, std::abs(y0[static_cast<std::size_t>(i)]));
  }
  const Eigen::VectorXcd coeffs = eig.vectors.partialPivLu().solve(y0c);

  std::vector<Vector> out;
  out.reserve(times.size());
  for (double t : times) {
    Eigen::VectorXcd weighted(coeffs.size());
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) weighted(i) = coeffs(i) * std::exp(eig.values(i) * t);
    const Eigen::VectorXcd y = eig.vectors * weighted;
    Vector real(static_cast<std::size_t>(y.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (std::abs(y(i).imag()) > 1e-10 * scale) {
        throw NumericalError("complex_residue", "linearized solution has a non-negligible imaginary part");
      }
      real[static_cast<std::size_t>(i)] = y(i).real();
    }
    out.push_back(std::move(real));
  }
  return out;
}

HessianDegeneracyReport hessian_degeneracy_report(int grid_n) {
  if (grid_n < 2) throw ConfigError("invalid_grid", "grid_n must be at least 2");
  HessianDegeneracyReport r;
  r.grid_n = grid_n;
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
  r.max_eigenvalue = -std::numeric_limits<double>::infinity();
  r.min_gradient_norm = std::numeric_limits<double>::infinity();

  for (int j = 1; j <= grid_n; ++j) {
    const double y = static_cast<double>(j) / (grid_n + 1);
    for (int i = 1; i <= grid_n; ++i) {
      const double x = static_cast<double>(i) / grid_n * y;
      const Eigen::Matrix2d h = hessian_of_M(x, y);
      const double norm = h.norm();
      const double det = h.determinant();
      r.max_abs_det = std::max(r.max_abs_det, std::abs(det));
      r.max_relative_det = std::max(r.max_relative_det, std::abs(det) / (norm * norm));

      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(h, Eigen::EigenvaluesOnly);
      const double lo = eig.eigenvalues()(0), hi = eig.eigenvalues()(1);
      r.min_eigenvalue = std::min(r.min_eigenvalue, lo);
      r.max_eigenvalue = std::max(r.max_eigenvalue, hi);
      const double trace_value = 2.0 / y + 2.0 * x * x / (y * y * y);
      r.max_trace_identity_error =
          std::max(r.max_trace_identity_error, std::abs(hi - trace_value) / trace_value);

      const Eigen::Vector2d flat(x, y);
      r.max_flat_residual_ratio = std::max(r.max_flat_residual_ratio, (h * flat).norm() / norm);

      const auto g = gradient_of_M(x, y);
      r.min_gradient_norm = std::min(r.min_gradient_norm, std::hypot(g[0], g[1]));
      ++r.points;
    }
  }
  r.det_ok = r.max_relative_det < 1e-9;
  r.psd_ok = r.min_eigenvalue >= -1e-12;
  r.flat_ok = r.max_flat_residual_ratio <= 1e-9;
  r.no_interior_critical_point = r.min_gradient_norm > 0.0;
  return r;
}

}  // namespace groupform
