#pragma once

#include "varclust/encoding.hpp"

namespace varclust {

enum class DistanceKind { chord, geodesic };

const char* to_string(DistanceKind kind);
/// Parses "chord" or "geodesic"; throws ValidationError otherwise.
DistanceKind parse_distance(const std::string& name);

/// [A|B] for two normed resultants. Throws ValidationError for un-normed
/// input and NumericalError when the value leaves [-1e-8, 1 + 1e-8].
double normed_dot(const Resultant& a, const Resultant& b);

/// sqrt(2 (1 - [A|B])).
double chord_dist(const Resultant& a, const Resultant& b);
/// arccos([A|B]), argument clamped to [-1, 1].
double geodesic_dist(const Resultant& a, const Resultant& b);

/// Squared distance from a scalar product between unit-norm operators.
double squared_distance_from_cos(double cos, DistanceKind kind);
double distance_from_cos(double cos, DistanceKind kind);

/// RV coefficient: [Rx|Ry] / (||Rx|| ||Ry||).
double rv_cos(const Resultant& rx, const Resultant& ry);

/// Phi^2 = tr(P_Y* P_X) for two categorical structures.
double phi2(const VariableStructure& x, const VariableStructure& y, const Weights& w);

/// Phi^2 / sqrt((r - 1)(s - 1)); the cosine of the normed projectors.
double tschuprow(const VariableStructure& x, const VariableStructure& y, const Weights& w);

/// sum_jk <x~_j | y~_k>_W^2 with X~ = X M^{1/2}, Y~ = Y N^{1/2}.
double resultant_dot_expanded(const Matrix& x, const Matrix& m, const Matrix& y, const Matrix& n, const Weights& w);

}  // namespace varclust
