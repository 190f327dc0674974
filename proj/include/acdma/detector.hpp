#pragma once

// Rank-L multistage detectors designed from asymptotic moments.

#include <span>
#include <stdexcept>

#include <Eigen/Core>

#include "acdma/moments.hpp"

namespace acdma {

class DetectorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MomentInputs {
  Eigen::MatrixXd Xi;  // Xi_ij = R_{i+j} + sigma^2 R_{i+j-1}, 1-based
  Eigen::VectorXd xi;  // xi_i = R_i
};

// From a sequence R_0, R_1, ..., R_{2L}.
MomentInputs build_moment_inputs(std::span<const double> R, double noise_variance, int rank);
// Per-class diagonal elements of a moment table.
MomentInputs build_moment_inputs(const MomentTable& table, std::size_t class_index,
                                 double noise_variance, int rank);
// Class-averaged eigenvalue moments m^(l) of a moment table.
MomentInputs build_average_inputs(const MomentTable& table, double noise_variance, int rank);

// The solve works on D Xi D with D = diag(Xi)^{-1/2}; the condition guard and
// the optional ridge (ridge_scale * trace / L on the diagonal) apply there.
struct SolveOptions {
  double max_condition = 1e12;
  bool ridge = false;
  double ridge_scale = 1e-11;
};

double condition_number(const Eigen::MatrixXd& Xi);

// Wiener-Hopf weights Xi^{-1} xi. Throws DetectorError above max_condition.
Eigen::VectorXd mmse_weights(const Eigen::MatrixXd& Xi, const Eigen::VectorXd& xi,
                             const SolveOptions& opts = {});

// (w^T xi)^2 / (w^T (Xi - xi xi^T) w); invariant under w -> c w.
double sinr_general(const Eigen::VectorXd& w, const Eigen::MatrixXd& Xi, const Eigen::VectorXd& xi);

// q / (1 - q) with q = xi^T Xi^{-1} xi.
double sinr_wiener(const Eigen::MatrixXd& Xi, const Eigen::VectorXd& xi, const SolveOptions& opts = {});

double to_db(double linear);
double from_db(double db);

struct DetectorDesign {
  int rank = 1;
  Eigen::MatrixXd xi_matrix;
  Eigen::VectorXd xi_vector;
  Eigen::VectorXd weights;
  double sinr = 0.0;

  double sinr_db() const { return to_db(sinr); }
};

// Per-user-class multistage Wiener filter.
DetectorDesign wiener_design(const MomentTable& table, std::size_t class_index, double noise_variance,
                             int rank, const SolveOptions& opts = {});

// Common weights for all users from class-averaged moments; sinr is the
// value on the averaged inputs. Use sinr_general with per-class inputs to
// evaluate the weights for one class.
DetectorDesign polynomial_expansion_design(const MomentTable& table, double noise_variance, int rank,
                                           const SolveOptions& opts = {});

}  // namespace acdma
