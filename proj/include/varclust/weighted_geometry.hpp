#pragma once

#include <Eigen/Dense>

namespace varclust {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/**
 * Positive observation weights with unit sum. They define the metric
 * W = diag(w) on R^n used by every scalar product in the library.
 */
class Weights {
 public:
  /// Throws ValidationError unless every entry is > 0 and the sum is 1 (1e-12).
  explicit Weights(Vector w);

  static Weights uniform(Index n);
  /// Rescales positive raw weights to unit sum.
  static Weights normalized(const Vector& raw);

  Index size() const { return w_.size(); }
  const Vector& values() const { return w_; }
  double operator[](Index i) const { return w_[i]; }

  Vector sqrt() const { return w_.cwiseSqrt(); }
  Vector inv_sqrt() const { return w_.cwiseSqrt().cwiseInverse(); }

 private:
  Vector w_;
};

double w_dot(const Vector& x, const Vector& y, const Weights& w);
double w_norm(const Vector& x, const Weights& w);

Vector center(const Vector& x, const Weights& w);
Matrix center_columns(const Matrix& x, const Weights& w);
/// Centres and scales to unit W-norm. Throws ValidationError on zero variance.
Vector standardize(const Vector& x, const Weights& w);

/// W^{-1} A' W, the adjoint of A for the W scalar product.
Matrix adjoint(const Matrix& a, const Weights& w);

/// [A|B] = tr(A* B) for arbitrary n x n operators.
double operator_dot(const Matrix& a, const Matrix& b, const Weights& w);

/// tr(AB). Equals operator_dot when A is W-self-adjoint, which holds for
/// every resultant; it needs no weights.
double spsd_dot(const Matrix& a, const Matrix& b);

/// WA symmetric and spectrum non-negative, both up to the tolerances below.
bool is_w_spsd(const Matrix& a, const Weights& w);

/// Eigen-decomposition A = U diag(values) U' W with U' W U = I.
struct WEigen {
  Matrix vectors;
  Vector values;  // descending, >= 0
};

/**
 * Decomposes a W-spsd operator through the symmetric similarity
 * S = W^{1/2} A W^{-1/2}. Only the numerical rank (eigenvalues above
 * 1e-10 * max) is kept. Each eigenvector is signed so that its
 * largest-magnitude entry is positive.
 *
 * Throws NumericalError if WA is asymmetric beyond 1e-10 * ||WA|| or an
 * eigenvalue is below -1e-10 * max.
 */
WEigen w_spsd_eigen(const Matrix& a, const Weights& w);

/// Full spectrum (n values, descending, small negatives clamped to 0).
Vector w_spsd_spectrum(const Matrix& a, const Weights& w);

/// Count of values above 1e-10 times the largest one.
Index numerical_rank(const Vector& descending_values);

/**
 * V = W^{-1} G (G' W^{-1} G)^{-1/2}: the W-orthonormal frame maximizing
 * tr(U'G) subject to U' W U = I. Throws NumericalError when G' W^{-1} G has
 * an eigenvalue below 1e-12 times its largest.
 */
Matrix w_orthonormal_polar(const Matrix& g, const Weights& w);

/// Flips column signs so the largest-magnitude entry of each column is positive.
void fix_column_signs(Matrix& u);

/// Symmetric square root of an spd matrix.
Matrix spd_sqrt(const Matrix& m);

}  // namespace varclust
