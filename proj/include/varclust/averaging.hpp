#pragma once

#include <span>
#include <string>
#include <vector>

#include "varclust/encoding.hpp"

namespace varclust {

/// Non-owning list of operators fed to the kernels.
using OperatorRefs = std::vector<const Matrix*>;
OperatorRefs refs_of(std::span<const Resultant> resultants);

/**
 * Factored unit-norm rank-H operator R = U diag(lambda) U' W, with
 * U' W U = I, ||lambda|| = 1 and lambda >= 0.
 */
struct RankHOperator {
  Matrix basis;     // U, n x H
  Vector spectrum;  // lambda, H

  Index rank() const { return spectrum.size(); }
  Matrix to_operator(const Weights& w) const;
  /// Columns reordered by descending spectrum, signs fixed.
  RankHOperator sorted() const;
};

/// Scalar product of two factored operators: tr(L_a C L_b C'), C = U_a' W U_b.
double rank_h_dot(const RankHOperator& a, const RankHOperator& b, const Weights& w);

/// Non-negative weights over K resultants, summing to 1.
class WeightSystem {
 public:
  explicit WeightSystem(Vector omega);
  static WeightSystem uniform(Index k);

  const Vector& values() const { return omega_; }
  Index size() const { return omega_.size(); }

 private:
  Vector omega_;
};

/// How many eigen-directions a rank-H average keeps.
struct RankCriterion {
  enum class Kind { trace_ratio, cattell, fixed };

  Kind kind = Kind::fixed;
  double theta = 1.0;  // trace_ratio
  Index rank = 1;      // fixed

  static RankCriterion trace_ratio(double theta);
  static RankCriterion cattell();
  static RankCriterion fixed(Index h);

  std::string describe() const;
};

/// sum_k omega_k R_k. Not normed.
Resultant weighted_average(std::span<const Resultant> resultants, const WeightSystem& omega);

/// Weighted average projected on the unit sphere.
Resultant sphere_average(std::span<const Resultant> resultants, const WeightSystem& omega);

/// Top-H eigenpairs of a W-spsd operator, spectrum renormalized to unit length.
RankHOperator truncate_rank(const Matrix& op, Index h, const Weights& w);

/// Euclidean (chord) rank-H average: truncated decomposition of the weighted average.
RankHOperator rank_h_average_euclidean(std::span<const Resultant> resultants, const WeightSystem& omega, Index h,
                                       const Weights& w);

/**
 * Picks H from a descending spectrum.
 *  - trace_ratio(theta): smallest H whose cumulative share reaches theta;
 *    theta = 0 gives 1 and theta = 1 gives the numerical rank.
 *  - cattell: interior index (1-based) of the largest second difference.
 *  - fixed(H): H capped at the numerical rank.
 */
Index choose_rank(const Vector& eigenvalues, const RankCriterion& criterion);

/// g = -sum_k omega_k arccos([R_k|R])^2.
double geodesic_objective(const RankHOperator& r, std::span<const Resultant> resultants, const WeightSystem& omega,
                          const Weights& w);

struct GeodesicGradients {
  Vector lambda;  // dg / dlambda
  Matrix basis;   // dg / dU
};

/// Exact partial derivatives of the geodesic objective in (lambda, U).
GeodesicGradients geodesic_gradients(const RankHOperator& r, std::span<const Resultant> resultants,
                                     const WeightSystem& omega, const Weights& w);

/**
 * One ascent step: lambda+ = gamma / ||gamma||, U+ = W-polar factor of Gamma.
 * Columns of the result stay paired with the input's columns (not sorted).
 * Negative gamma components are clamped to 0 and counted in `clamped`.
 */
RankHOperator geodesic_step(const RankHOperator& r, std::span<const Resultant> resultants,
                            const WeightSystem& omega, const Weights& w, int* clamped = nullptr);

struct ArcSearch {
  double tau = 0.0;
  double objective = 0.0;
  Matrix op;  // normed, rank up to 2H
};

/// Golden-section maximization of g on the normalized chord from prev to next.
ArcSearch arc_line_search(const RankHOperator& prev, const RankHOperator& next,
                          std::span<const Resultant> resultants, const WeightSystem& omega, const Weights& w);

/// max(||lambda - gamma^||, ||U - polar(Gamma)||_F up to column signs).
double fixed_point_residual(const RankHOperator& r, std::span<const Resultant> resultants,
                            const WeightSystem& omega, const Weights& w);

struct GeodesicOptions {
  int max_iter = 500;
  double objective_tol = 1e-10;
  double residual_tol = 1e-6;
  int golden_iters = 60;
};

struct GeodesicAverage {
  RankHOperator average;
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  int clamped_events = 0;
  int fallback_steps = 0;  // steps taken on the rank-preserving arc
  int plain_steps = 0;     // unguarded steps taken once gains fall below rounding
};

/**
 * Geodesic rank-H average. Starts from the euclidean rank-H average and
 * alternates geodesic_step with a line search until the objective gain
 * drops below objective_tol and the fixed-point residual is within
 * residual_tol, or max_iter is reached (converged = false).
 */
GeodesicAverage rank_h_average_geodesic(std::span<const Resultant> resultants, const WeightSystem& omega, Index h,
                                        const Weights& w, const GeodesicOptions& options = {});

}  // namespace varclust
