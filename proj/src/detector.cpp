#include "acdma/detector.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace acdma {

MomentInputs build_moment_inputs(std::span<const double> R, double noise_variance, int rank) {
  if (rank < 1) throw std::invalid_argument("detector rank must be >= 1");
  if (static_cast<int>(R.size()) < 2 * rank + 1) {
    throw DetectorError(fmt::format("rank {} needs R_1..R_{} (table depth {}), have depth {}", rank,
                                    2 * rank, 2 * rank, static_cast<int>(R.size()) - 1));
  }
  MomentInputs in;
  in.Xi.resize(rank, rank);
  in.xi.resize(rank);
  for (int i = 1; i <= rank; ++i) {
    in.xi(i - 1) = R[i];
    for (int j = 1; j <= rank; ++j) in.Xi(i - 1, j - 1) = R[i + j] + noise_variance * R[i + j - 1];
  }
  return in;
}

MomentInputs build_moment_inputs(const MomentTable& table, std::size_t class_index, double noise_variance,
                                 int rank) {
  if (class_index >= table.R.size())
    throw std::out_of_range(fmt::format("class {} not in moment table ({} classes)", class_index, table.R.size()));
  if (table.depth < 2 * rank)
    throw DetectorError(fmt::format("rank {} needs table depth {}, table has depth {}", rank, 2 * rank, table.depth));
  return build_moment_inputs(table.R[class_index], noise_variance, rank);
}

MomentInputs build_average_inputs(const MomentTable& table, double noise_variance, int rank) {
  if (table.depth < 2 * rank)
    throw DetectorError(fmt::format("rank {} needs table depth {}, table has depth {}", rank, 2 * rank, table.depth));
  return build_moment_inputs(table.eig_moments, noise_variance, rank);
}

double condition_number(const Eigen::MatrixXd& Xi) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Xi, Eigen::EigenvaluesOnly);
  const auto ev = es.eigenvalues().cwiseAbs();
  const double lo = ev.minCoeff();
  return lo > 0.0 ? ev.maxCoeff() / lo : std::numeric_limits<double>::infinity();
}

Eigen::VectorXd mmse_weights(const Eigen::MatrixXd& Xi, const Eigen::VectorXd& xi, const SolveOptions& opts) {
  if (Xi.rows() != Xi.cols() || Xi.rows() != xi.size())
    throw std::invalid_argument("mmse_weights: dimension mismatch");
  if (!((Xi.diagonal().array() > 0.0).all())) throw DetectorError("mmse_weights: Xi has a non-positive diagonal");
  // Moment matrices grow geometrically along the diagonal; solve in the
  // Jacobi-equilibrated basis, where the conditioning guard is meaningful.
  const Eigen::VectorXd d = Xi.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd A = d.asDiagonal() * (0.5 * (Xi + Xi.transpose())) * d.asDiagonal();
  if (opts.ridge) A.diagonal().array() += opts.ridge_scale * A.trace() / A.rows();
  const double cond = condition_number(A);
  if (!(cond <= opts.max_condition)) {
    throw DetectorError(fmt::format(
        "Xi is ill-conditioned (condition number {:.3g} > {:.3g}); use a smaller rank or enable the ridge option",
        cond, opts.max_condition));
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw DetectorError("mmse_weights: factorization failed");
  const Eigen::VectorXd b = d.asDiagonal() * xi;
  return d.asDiagonal() * ldlt.solve(b);
}

double sinr_general(const Eigen::VectorXd& w, const Eigen::MatrixXd& Xi, const Eigen::VectorXd& xi) {
  const double signal = w.dot(xi);
  const Eigen::MatrixXd C = Xi - xi * xi.transpose();
  const double den = w.dot(C * w);
  if (!(den > 0.0))
    throw DetectorError(fmt::format("sinr_general: non-positive error variance {:.3g}", den));
  return signal * signal / den;
}

double sinr_wiener(const Eigen::MatrixXd& Xi, const Eigen::VectorXd& xi, const SolveOptions& opts) {
  const Eigen::VectorXd w = mmse_weights(Xi, xi, opts);
  const double q = xi.dot(w);
  if (!(q < 1.0) || q < 0.0)
    throw DetectorError(fmt::format("sinr_wiener: q = {:.17g} outside [0, 1); numerical breakdown", q));
  return q / (1.0 - q);
}

double to_db(double linear) { return 10.0 * std::log10(linear); }
double from_db(double db) { return std::pow(10.0, db / 10.0); }

namespace {
DetectorDesign design_from(const MomentInputs& in, int rank, const SolveOptions& opts) {
  DetectorDesign d;
  d.rank = rank;
  d.xi_matrix = in.Xi;
  d.xi_vector = in.xi;
  d.weights = mmse_weights(in.Xi, in.xi, opts);
  const double q = in.xi.dot(d.weights);
  if (!(q < 1.0) || q < 0.0)
    throw DetectorError(fmt::format("Wiener design: q = {:.17g} outside [0, 1)", q));
  d.sinr = q / (1.0 - q);
  return d;
}
}  // namespace

DetectorDesign wiener_design(const MomentTable& table, std::size_t class_index, double noise_variance,
                             int rank, const SolveOptions& opts) {
  return design_from(build_moment_inputs(table, class_index, noise_variance, rank), rank, opts);
}

DetectorDesign polynomial_expansion_design(const MomentTable& table, double noise_variance, int rank,
                                           const SolveOptions& opts) {
  return design_from(build_average_inputs(table, noise_variance, rank), rank, opts);
}

}  // namespace acdma
