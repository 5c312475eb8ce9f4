#include "varclust/operator_space.hpp"

#include <algorithm>
#include <cmath>

#include "varclust/errors.hpp"

namespace varclust {

namespace {

constexpr double kCosSlack = 1e-8;

double checked_cos(double c) {
  if (!std::isfinite(c) || c < -kCosSlack || c > 1.0 + kCosSlack) {
    throw NumericalError("scalar product of normed resultants outside [0, 1]: " + std::to_string(c));
  }
  return std::clamp(c, -1.0, 1.0);
}

void require_normed(const Resultant& r) {
  if (!r.normed) throw ValidationError("distance requires normed resultants");
}

void require_categorical(const VariableStructure& s) {
  if (s.kind != VariableKind::categorical) throw ValidationError("'" + s.label + "' is not categorical");
}

}  // namespace

const char* to_string(DistanceKind kind) { return kind == DistanceKind::chord ? "chord" : "geodesic"; }

DistanceKind parse_distance(const std::string& name) {
  if (name == "chord") return DistanceKind::chord;
  if (name == "geodesic") return DistanceKind::geodesic;
  throw ValidationError("unknown distance '" + name + "' (expected chord or geodesic)");
}

double normed_dot(const Resultant& a, const Resultant& b) {
  require_normed(a);
  require_normed(b);
  return checked_cos(spsd_dot(a.op, b.op));
}

double squared_distance_from_cos(double cos, DistanceKind kind) {
  const double c = checked_cos(cos);
  if (kind == DistanceKind::chord) return std::max(0.0, 2.0 * (1.0 - c));
  const double d = std::acos(c);
  return d * d;
}

double distance_from_cos(double cos, DistanceKind kind) {
  const double c = checked_cos(cos);
  return kind == DistanceKind::chord ? std::sqrt(std::max(0.0, 2.0 * (1.0 - c))) : std::acos(c);
}

double chord_dist(const Resultant& a, const Resultant& b) {
  return distance_from_cos(normed_dot(a, b), DistanceKind::chord);
}

double geodesic_dist(const Resultant& a, const Resultant& b) {
  return distance_from_cos(normed_dot(a, b), DistanceKind::geodesic);
}

double rv_cos(const Resultant& rx, const Resultant& ry) {
  const double nx = std::sqrt(std::max(0.0, spsd_dot(rx.op, rx.op)));
  const double ny = std::sqrt(std::max(0.0, spsd_dot(ry.op, ry.op)));
  if (!(nx > 0.0) || !(ny > 0.0)) throw ValidationError("RV coefficient of a zero resultant");
  return checked_cos(spsd_dot(rx.op, ry.op) / (nx * ny));
}

double phi2(const VariableStructure& x, const VariableStructure& y, const Weights& w) {
  require_categorical(x);
  require_categorical(y);
  const Resultant px = resultant(x, w, false);
  const Resultant py = resultant(y, w, false);
  return operator_dot(py.op, px.op, w);
}

double tschuprow(const VariableStructure& x, const VariableStructure& y, const Weights& w) {
  const double p = phi2(x, y, w);
  return p / std::sqrt(static_cast<double>(x.levels - 1) * static_cast<double>(y.levels - 1));
}

double resultant_dot_expanded(const Matrix& x, const Matrix& m, const Matrix& y, const Matrix& n, const Weights& w) {
  if (x.rows() != w.size() || y.rows() != w.size()) throw ValidationError("block row count does not match weights");
  if (m.rows() != x.cols() || n.rows() != y.cols()) throw ValidationError("metric size does not match block");
  const Matrix xt = x * spd_sqrt(m);
  const Matrix yt = y * spd_sqrt(n);
  const Matrix cross = xt.transpose() * w.values().asDiagonal() * yt;
  return cross.squaredNorm();
}

}  // namespace varclust
