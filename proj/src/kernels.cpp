#include "varclust/kernels.hpp"

#include "varclust/errors.hpp"

#ifdef VARCLUST_HAVE_OPENMP
#include <omp.h>
#endif

namespace varclust::kernels {

namespace {

// Single entry of tr(AB); fixed summation order (column-major over A).
double trace_product(const Matrix& a, const Matrix& b) {
  const Index n = a.rows();
  double sum = 0.0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) sum += a(i, j) * b(j, i);
  }
  return sum;
}

void check_ops(OpSpan ops) {
  if (ops.empty()) return;
  const Index n = ops.front()->rows();
  for (const Matrix* p : ops) {
    const Matrix& m = *p;
    if (m.rows() != n || m.cols() != n) throw ValidationError("operators must share one n x n shape");
  }
}

void check_pair(OpSpan a, OpSpan b) {
  check_ops(a);
  check_ops(b);
  if (!a.empty() && !b.empty() && a.front()->rows() != b.front()->rows()) {
    throw ValidationError("operators must share one n x n shape");
  }
}

double quadratic_form(const Matrix& r, const Vector& wu, const Vector& u) {
  // (W u)' R u, with R u accumulated row by row.
  const Index n = r.rows();
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Index j = 0; j < n; ++j) row += r(i, j) * u[j];
    sum += wu[i] * row;
  }
  return sum;
}

}  // namespace

namespace serial {

Matrix dot_matrix(OpSpan a, OpSpan b) {
  check_pair(a, b);
  Matrix g(static_cast<Index>(a.size()), static_cast<Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) g(i, j) = trace_product(*a[i], *b[j]);
  }
  return g;
}

Matrix gram(OpSpan a) {
  check_ops(a);
  const auto k = static_cast<Index>(a.size());
  Matrix g(k, k);
  for (Index i = 0; i < k; ++i) {
    for (Index j = i; j < k; ++j) g(i, j) = g(j, i) = trace_product(*a[i], *a[j]);
  }
  return g;
}

Matrix weighted_sum(OpSpan ops, const Vector& coeffs) {
  check_ops(ops);
  if (ops.empty()) throw ValidationError("weighted_sum needs at least one operator");
  if (coeffs.size() != static_cast<Index>(ops.size())) throw ValidationError("coefficient count mismatch");
  const Index n = ops.front()->rows();
  Matrix out(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < ops.size(); ++k) s += coeffs[static_cast<Index>(k)] * (*ops[k])(i, j);
      out(i, j) = s;
    }
  }
  return out;
}

Matrix quadratic_forms(OpSpan ops, const Matrix& u, const Weights& w) {
  check_ops(ops);
  if (!ops.empty() && u.rows() != ops.front()->rows()) throw ValidationError("basis row count mismatch");
  const Matrix wu = w.values().asDiagonal() * u;
  Matrix q(static_cast<Index>(ops.size()), u.cols());
  for (std::size_t k = 0; k < ops.size(); ++k) {
    for (Index h = 0; h < u.cols(); ++h) q(static_cast<Index>(k), h) = quadratic_form(*ops[k], wu.col(h), u.col(h));
  }
  return q;
}

}  // namespace serial

#ifdef VARCLUST_HAVE_OPENMP

Matrix dot_matrix(OpSpan a, OpSpan b) {
  check_pair(a, b);
  const auto rows = static_cast<Index>(a.size());
  const auto cols = static_cast<Index>(b.size());
  Matrix g(rows, cols);
  const Index total = rows * cols;
#pragma omp parallel for schedule(static)
  for (Index t = 0; t < total; ++t) {
    const Index i = t / cols;
    const Index j = t % cols;
    g(i, j) = trace_product(*a[static_cast<std::size_t>(i)], *b[static_cast<std::size_t>(j)]);
  }
  return g;
}

Matrix gram(OpSpan a) {
  check_ops(a);
  const auto k = static_cast<Index>(a.size());
  Matrix g(k, k);
#pragma omp parallel for schedule(dynamic)
  for (Index i = 0; i < k; ++i) {
    for (Index j = i; j < k; ++j) {
      g(i, j) = g(j, i) = trace_product(*a[static_cast<std::size_t>(i)], *a[static_cast<std::size_t>(j)]);
    }
  }
  return g;
}

Matrix weighted_sum(OpSpan ops, const Vector& coeffs) {
  check_ops(ops);
  if (ops.empty()) throw ValidationError("weighted_sum needs at least one operator");
  if (coeffs.size() != static_cast<Index>(ops.size())) throw ValidationError("coefficient count mismatch");
  const Index n = ops.front()->rows();
  Matrix out(n, n);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < ops.size(); ++k) s += coeffs[static_cast<Index>(k)] * (*ops[k])(i, j);
      out(i, j) = s;
    }
  }
  return out;
}

Matrix quadratic_forms(OpSpan ops, const Matrix& u, const Weights& w) {
  check_ops(ops);
  if (!ops.empty() && u.rows() != ops.front()->rows()) throw ValidationError("basis row count mismatch");
  const Matrix wu = w.values().asDiagonal() * u;
  const auto k = static_cast<Index>(ops.size());
  Matrix q(k, u.cols());
  const Index total = k * u.cols();
#pragma omp parallel for schedule(static)
  for (Index t = 0; t < total; ++t) {
    const Index r = t / u.cols();
    const Index h = t % u.cols();
    q(r, h) = quadratic_form(*ops[static_cast<std::size_t>(r)], wu.col(h), u.col(h));
  }
  return q;
}

int thread_count() { return omp_get_max_threads(); }

#else

Matrix dot_matrix(OpSpan a, OpSpan b) { return serial::dot_matrix(a, b); }
Matrix gram(OpSpan a) { return serial::gram(a); }
Matrix weighted_sum(OpSpan ops, const Vector& coeffs) { return serial::weighted_sum(ops, coeffs); }
Matrix quadratic_forms(OpSpan ops, const Matrix& u, const Weights& w) {
  return serial::quadratic_forms(ops, u, w);
}
int thread_count() { return 1; }

#endif

}  // namespace varclust::kernels
