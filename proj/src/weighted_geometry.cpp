#include "varclust/weighted_geometry.hpp"

#include <cmath>
#include <string>

#include "varclust/errors.hpp"

namespace varclust {

namespace {

constexpr double kSpsdTol = 1e-10;
constexpr double kPolarFloor = 1e-12;

void check_same_length(const Vector& x, const Vector& y, const Weights& w) {
  if (x.size() != w.size() || y.size() != w.size()) {
    throw ValidationError("vector length does not match the number of weights");
  }
}

void check_square(const Matrix& a, const Weights& w) {
  if (a.rows() != w.size() || a.cols() != w.size()) {
    throw ValidationError("operator must be n x n with n = " + std::to_string(w.size()));
  }
}

Eigen::SelfAdjointEigenSolver<Matrix> symmetrized_eigen(const Matrix& a, const Weights& w) {
  check_square(a, w);
  const Vector& wv = w.values();
  const Matrix wa = wv.asDiagonal() * a;
  const double scale = wa.norm();
  if ((wa - wa.transpose()).norm() > kSpsdTol * std::max(scale, 1e-300)) {
    throw NumericalError("operator is not W-symmetric");
  }
  // S = W^{1/2} A W^{-1/2} = W^{-1/2} (WA) W^{-1/2}
  const Vector is = w.inv_sqrt();
  Matrix s = is.asDiagonal() * (0.5 * (wa + wa.transpose())) * is.asDiagonal();
  return Eigen::SelfAdjointEigenSolver<Matrix>(s);
}

}  // namespace

Weights::Weights(Vector w) : w_(std::move(w)) {
  if (w_.size() == 0) throw ValidationError("weights must not be empty");
  for (Index i = 0; i < w_.size(); ++i) {
    if (!(w_[i] > 0.0) || !std::isfinite(w_[i])) {
      throw ValidationError("weight " + std::to_string(i) + " is not positive");
    }
  }
  if (std::abs(w_.sum() - 1.0) > 1e-12) throw ValidationError("weights must sum to 1");
}

Weights Weights::uniform(Index n) {
  if (n <= 0) throw ValidationError("weights must not be empty");
  return Weights(Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

Weights Weights::normalized(const Vector& raw) {
  if (raw.size() == 0) throw ValidationError("weights must not be empty");
  if (raw.minCoeff() <= 0.0) throw ValidationError("weights must be positive");
  Vector w = raw / raw.sum();
  // One correction pass keeps the sum within the 1e-12 invariant.
  w /= w.sum();
  return Weights(std::move(w));
}

double w_dot(const Vector& x, const Vector& y, const Weights& w) {
  check_same_length(x, y, w);
  return (x.array() * w.values().array() * y.array()).sum();
}

double w_norm(const Vector& x, const Weights& w) { return std::sqrt(w_dot(x, x, w)); }

Vector center(const Vector& x, const Weights& w) {
  if (x.size() != w.size()) throw ValidationError("vector length does not match the number of weights");
  const double mean = w.values().dot(x);
  return x.array() - mean;
}

Matrix center_columns(const Matrix& x, const Weights& w) {
  if (x.rows() != w.size()) throw ValidationError("row count does not match the number of weights");
  const Eigen::RowVectorXd means = w.values().transpose() * x;
  return x.rowwise() - means;
}

Vector standardize(const Vector& x, const Weights& w) {
  Vector c = center(x, w);
  const double norm = w_norm(c, w);
  if (!(norm > 0.0) || norm <= 1e-14 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
    throw ValidationError("cannot standardize a zero-variance variable");
  }
  return c / norm;
}

Matrix adjoint(const Matrix& a, const Weights& w) {
  check_square(a, w);
  const Vector& wv = w.values();
  return wv.cwiseInverse().asDiagonal() * a.transpose() * wv.asDiagonal();
}

double operator_dot(const Matrix& a, const Matrix& b, const Weights& w) {
  check_square(a, w);
  check_square(b, w);
  // tr(W^{-1} A' W B) = sum_ij (w_j / w_i) A_ji B_ji
  const Vector& wv = w.values();
  double sum = 0.0;
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      sum += wv[i] / wv[j] * a(i, j) * b(i, j);
    }
  }
  return sum;
}

double spsd_dot(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.cols() || a.cols() != b.rows()) throw ValidationError("operator dimension mismatch");
  return a.cwiseProduct(b.transpose()).sum();
}

bool is_w_spsd(const Matrix& a, const Weights& w) {
  try {
    const auto es = symmetrized_eigen(a, w);
    const Vector& ev = es.eigenvalues();
    const double top = std::max(ev.maxCoeff(), 0.0);
    return ev.minCoeff() >= -kSpsdTol * top;
  } catch (const NumericalError&) {
    return false;
  }
}

Vector w_spsd_spectrum(const Matrix& a, const Weights& w) {
  const auto es = symmetrized_eigen(a, w);
  Vector ev = es.eigenvalues().reverse();
  const double top = std::max(ev[0], 0.0);
  if (ev[ev.size() - 1] < -kSpsdTol * top) throw NumericalError("operator has a negative eigenvalue");
  return ev.cwiseMax(0.0);
}

Index numerical_rank(const Vector& values) {
  if (values.size() == 0) return 0;
  const double top = values.maxCoeff();
  if (!(top > 0.0)) return 0;
  Index r = 0;
  for (Index i = 0; i < values.size(); ++i) {
    if (values[i] > kSpsdTol * top) ++r;
  }
  return r;
}

WEigen w_spsd_eigen(const Matrix& a, const Weights& w) {
  const auto es = symmetrized_eigen(a, w);
  const Vector ev = es.eigenvalues().reverse();
  const double top = std::max(ev[0], 0.0);
  if (ev[ev.size() - 1] < -kSpsdTol * top) throw NumericalError("operator has a negative eigenvalue");
  const Index r = numerical_rank(ev);
  WEigen out;
  out.values = ev.head(r);
  out.vectors = w.inv_sqrt().asDiagonal() * es.eigenvectors().rowwise().reverse().leftCols(r);
  fix_column_signs(out.vectors);
  return out;
}

Matrix w_orthonormal_polar(const Matrix& g, const Weights& w) {
  if (g.rows() != w.size()) throw ValidationError("row count does not match the number of weights");
  const Vector winv = w.values().cwiseInverse();
  const Matrix wig = winv.asDiagonal() * g;
  const Matrix gram = g.transpose() * wig;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (gram + gram.transpose()));
  const Vector& ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  if (!(top > 0.0) || ev.minCoeff() <= kPolarFloor * top) {
    throw NumericalError("polar factor undefined: G is rank-deficient");
  }
  const Matrix& q = es.eigenvectors();
  const Matrix inv_sqrt = q * ev.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
  return wig * inv_sqrt;
}

void fix_column_signs(Matrix& u) {
  for (Index h = 0; h < u.cols(); ++h) {
    Index arg = 0;
    u.col(h).cwiseAbs().maxCoeff(&arg);
    if (u(arg, h) < 0.0) u.col(h) = -u.col(h);
  }
}

Matrix spd_sqrt(const Matrix& m) {
  if (m.rows() != m.cols()) throw ValidationError("metric must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  if (es.eigenvalues().minCoeff() <= 0.0) throw ValidationError("metric is not positive definite");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace varclust
