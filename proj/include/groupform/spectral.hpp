#pragma once

// Linear stability around equilibria of the mean-field flow: Jacobians of the
// choice map, the spectrum of (J - I), classification, linearized solutions,
// and the curvature survey of the two-group attraction function.

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "groupform/model.hpp"

namespace groupform {

/// Central-difference Jacobian J_ij = d p_i / d pi_j of the raw choice map
/// (perturbed states are not renormalized). Every pi_k must be >= 10 h.
Matrix jacobian(const ModelParams& params, std::span<const double> eps, const SimplexState& state,
                double h = 1e-6);

struct EigenDecomposition {
  Eigen::VectorXcd values;   // descending real part; conjugate pairs adjacent, +Im first
  Eigen::MatrixXcd vectors;  // unit-length right eigenvectors, column i pairs with values(i)
  Eigen::VectorXd residuals; // ||m v - lambda v|| per pair
};

/// Full complex spectrum of a real square matrix (K <= 128). Throws
/// NumericalError if the QR iteration fails or a residual exceeds
/// 1e-8 ||m||_F.
EigenDecomposition eigen_decompose(const Matrix& m);

enum class StabilityClass { stable_node, unstable_node, stable_spiral, unstable_spiral, marginal };

std::string_view to_string(StabilityClass c);

struct ClassificationTolerances {
  double marginal = 1e-6;
  double imag = 1e-8;
};

StabilityClass classify_equilibrium(const Eigen::VectorXcd& eigenvalues,
                                    const ClassificationTolerances& tol = {});

/// Spectrum of `m` restricted to the zero-sum subspace {v : sum v = 0}.
/// Requires that subspace to be invariant under `m`, which holds for J - I
/// because the columns of J sum to zero.
Eigen::VectorXcd tangent_eigenvalues(const Matrix& m);

struct SpectralReport {
  SimplexState point;
  Matrix jacobian;
  Matrix shifted;  // J - I
  EigenDecomposition decomposition;
  Eigen::Index normal_mode = -1;  // index of the eigenpair off the simplex
  Eigen::VectorXcd tangent;       // tangent-mode spectrum, descending real part
  StabilityClass classification = StabilityClass::marginal;
};

/// Jacobian, eigendecomposition of (J - I) and classification on the tangent
/// modes at `state`.
SpectralReport spectral_report(const ModelParams& params, std::span<const double> eps,
                               const SimplexState& state, double h = 1e-6,
                               const ClassificationTolerances& tol = {});

/// y(t) = sum_i c_i v_i exp(lambda_i t) with V c = y0, evaluated at each time.
/// Throws NumericalError("ill_conditioned_decomposition") when cond(V) > 1e8.
std::vector<Vector> linearized_trajectory(const Matrix& m, std::span<const double> y0,
                                          std::span<const double> times);

struct HessianDegeneracyReport {
  int grid_n = 0;
  std::size_t points = 0;
  double max_abs_det = 0.0;
  double max_relative_det = 0.0;        // |det H| / ||H||_F^2
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double max_flat_residual_ratio = 0.0; // ||H (x, y)|| / ||H||_F
  double max_trace_identity_error = 0.0;// relative gap between lambda_max and 2/y + 2x^2/y^3
  double min_gradient_norm = 0.0;
  bool det_ok = false;
  bool psd_ok = false;
  bool flat_ok = false;
  bool no_interior_critical_point = false;

  bool passed() const { return det_ok && psd_ok && flat_ok && no_interior_critical_point; }
};

/// Surveys the Hessian of M(x, y) = x^2/y - x + y on grid_n^2 interior points
/// with x <= y: y_j = j / (grid_n + 1), x = r_i y with r_i = i / grid_n.
HessianDegeneracyReport hessian_degeneracy_report(int grid_n);

}  // namespace groupform
