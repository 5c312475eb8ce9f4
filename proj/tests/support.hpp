#pragma once

// Random instance generators and independent oracles shared by the tests.
// Oracles here recompute quantities along a different path than the
// library (contingency tables, dense traces, brute-force sampling).

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "varclust/averaging.hpp"
#include "varclust/encoding.hpp"
#include "varclust/random.hpp"
#include "varclust/weighted_geometry.hpp"

namespace testing {

using namespace varclust;

inline Vector normal_vector(Index n, Rng& rng) {
  std::normal_distribution<double> z;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = z(rng);
  return v;
}

inline Matrix normal_matrix(Index r, Index c, Rng& rng) {
  std::normal_distribution<double> z;
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = z(rng);
  return m;
}

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Positive weights in [0.5, 1.5] before normalization.
inline Weights random_weights(Index n, Rng& rng) {
  Vector raw(n);
  for (Index i = 0; i < n; ++i) raw[i] = uniform(rng, 0.5, 1.5);
  return Weights::normalized(raw);
}

/// Level ids 0..levels-1 in random order, every level observed.
inline std::vector<int> random_labels(Index n, int levels, Rng& rng) {
  std::vector<int> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = static_cast<int>(i % levels);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

inline Matrix random_spd(Index q, Rng& rng) {
  const Matrix a = normal_matrix(q, q, rng);
  return a * a.transpose() + 0.5 * Matrix::Identity(q, q);
}

/// Normed resultant of a random block with a random spd metric.
inline Resultant random_resultant(Index n, Index q, const Weights& w, Rng& rng) {
  return resultant(encode_block(normal_matrix(n, q, rng), random_spd(q, rng), w), w);
}

inline std::vector<Resultant> random_resultants(Index k, Index n, const Weights& w, Rng& rng, Index max_q = 3) {
  std::vector<Resultant> out;
  for (Index i = 0; i < k; ++i) out.push_back(random_resultant(n, uniform_int(rng, 1, static_cast<int>(max_q)), w, rng));
  return out;
}

/// Random U with U' W U = I, via Gram-Schmidt in the W metric.
inline Matrix random_w_orthonormal(Index n, Index h, const Weights& w, Rng& rng) {
  Matrix u = normal_matrix(n, h, rng);
  for (Index j = 0; j < h; ++j) {
    for (Index i = 0; i < j; ++i) u.col(j) -= w_dot(u.col(i), u.col(j), w) * u.col(i);
    u.col(j) /= w_norm(u.col(j), w);
  }
  return u;
}

inline RankHOperator random_rank_h(Index n, Index h, const Weights& w, Rng& rng) {
  RankHOperator r;
  r.basis = random_w_orthonormal(n, h, w, rng);
  r.spectrum = Vector(h);
  for (Index i = 0; i < h; ++i) r.spectrum[i] = uniform(rng, 0.1, 1.0);
  r.spectrum /= r.spectrum.norm();
  return r;
}

/// Dense U diag(l) U' W.
inline Matrix dense(const RankHOperator& r, const Weights& w) {
  return r.basis * r.spectrum.asDiagonal() * r.basis.transpose() * w.values().asDiagonal();
}

/// sum_ij (w_i / w_j) A_ij B_ij, the entrywise form of tr(A* B).
inline double entrywise_dot(const Matrix& a, const Matrix& b, const Weights& w) {
  double s = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) s += w[i] / w[j] * a(i, j) * b(i, j);
  return s;
}

/// Contingency-table Phi^2 = sum_ij (p_ij - p_i p_j)^2 / (p_i p_j), with
/// weighted cell frequencies.
inline double contingency_phi2(const std::vector<int>& x, const std::vector<int>& y, const Weights& w) {
  std::map<int, double> px, py;
  std::map<std::pair<int, int>, double> pxy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w[static_cast<Index>(i)];
    px[x[i]] += wi;
    py[y[i]] += wi;
    pxy[{x[i], y[i]}] += wi;
  }
  double s = 0.0;
  for (const auto& [a, pa] : px) {
    for (const auto& [b, pb] : py) {
      const auto it = pxy.find({a, b});
      const double p = it == pxy.end() ? 0.0 : it->second;
      s += (p - pa * pb) * (p - pa * pb) / (pa * pb);
    }
  }
  return s;
}

/// Orthogonal q x q matrix from the QR of a Gaussian matrix.
inline Matrix random_orthogonal(Index q, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(normal_matrix(q, q, rng));
  return qr.householderQ() * Matrix::Identity(q, q);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Uniform point on the unit sphere of R^h with non-negative entries.
inline Vector random_simplex_direction(Index h, Rng& rng) {
  Vector v = normal_vector(h, rng).cwiseAbs();
  return v / v.norm();
}

}  // namespace testing
