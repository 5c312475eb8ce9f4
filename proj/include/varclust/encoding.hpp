#pragma once

#include <span>
#include <string>
#include <vector>

#include "varclust/weighted_geometry.hpp"

namespace varclust {

enum class VariableKind { numeric, categorical, block };

const char* to_string(VariableKind kind);

/**
 * A centred data block X (n x q) and the spd metric M (q x q) it is read
 * with. The resultant of the pair is X M X' W.
 */
struct VariableStructure {
  std::string label;
  VariableKind kind = VariableKind::numeric;
  Matrix data;    // X, W-centred columns
  Matrix metric;  // M
  /// 1 / ||X M X' W||; 1 for a single numeric variable, 1/sqrt(m-1) for a
  /// categorical one with m levels.
  double dim_weight = 1.0;
  int levels = 0;  // categorical only
};

/// A W-spsd operator, optionally scaled to unit norm.
struct Resultant {
  Matrix op;
  bool normed = false;
};

/// Single numeric variable, M = 1/v(x). Throws ValidationError on zero variance.
VariableStructure encode_numeric(const Vector& x, const Weights& w, std::string label = {});

/**
 * Categorical variable given as level ids. Levels are ordered by first
 * appearance and the last one is dropped; the retained indicators are
 * centred and M = (X' W X)^{-1}, so the resultant is the projector on
 * the variable's subspace.
 *
 * With declared_levels > 0, ids must lie in [0, declared_levels) and every
 * level must be observed.
 */
VariableStructure encode_categorical(std::span<const int> labels, const Weights& w, std::string label = {},
                                     int declared_levels = 0);

/// Arbitrary block with an spd metric; columns are centred here.
VariableStructure encode_block(const Matrix& x, const Matrix& metric, const Weights& w, std::string label = {});

/// X M X' W, divided by its norm when `normed`.
Resultant resultant(const VariableStructure& vs, const Weights& w, bool normed = true);

/**
 * The block [sqrt(w_1 c_1) X_1 M_1^{1/2}, ...] with identity metric, where
 * c_h = dim_weight of member h. Its normed resultant is the normed
 * weighted average of the members' normed resultants.
 */
VariableStructure compound_structure(std::span<const VariableStructure> members, std::span<const double> omega,
                                     const Weights& w);

}  // namespace varclust
