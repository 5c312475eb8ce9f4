#pragma once

// Data-parallel inner loops shared by averaging and clustering.
//
// Each kernel has a serial reference in `kernels::serial` and an OpenMP
// version in `kernels`. The parallel versions split work over independent
// output entries and keep every inner sum in the same order as the serial
// code, so both produce bit-identical results.

#include <span>

#include "varclust/weighted_geometry.hpp"

namespace varclust::kernels {

/// Non-owning list of operators; entries must be non-null.
using OpSpan = std::span<const Matrix* const>;

/// G(i, j) = tr(a_i b_j) for W-self-adjoint operators.
Matrix dot_matrix(OpSpan a, OpSpan b);

/// Symmetric case: G(i, j) = tr(a_i a_j).
Matrix gram(OpSpan a);

/// sum_k coeffs[k] * ops[k], accumulated in k order.
Matrix weighted_sum(OpSpan ops, const Vector& coeffs);

/// Q(k, h) = u_h' W R_k u_h for every operator R_k and column u_h of U.
Matrix quadratic_forms(OpSpan ops, const Matrix& u, const Weights& w);

/// Number of threads the parallel kernels will use (1 without OpenMP).
int thread_count();

namespace serial {

Matrix dot_matrix(OpSpan a, OpSpan b);
Matrix gram(OpSpan a);
Matrix weighted_sum(OpSpan ops, const Vector& coeffs);
Matrix quadratic_forms(OpSpan ops, const Matrix& u, const Weights& w);

}  // namespace serial

}  // namespace varclust::kernels
