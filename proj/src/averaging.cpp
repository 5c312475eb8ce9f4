#include "varclust/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <numeric>
#include <sstream>

#include "varclust/errors.hpp"
#include "varclust/kernels.hpp"

namespace varclust {

namespace {

constexpr double kGolden = 0.6180339887498949;  // (sqrt(5) - 1) / 2
constexpr double kMaxExtrapolation = 64.0;
constexpr double kObjectiveNoise = 1e-14;
constexpr double kSingularH = 1e-9;
constexpr double kTieBreak = 1e-4;

void require_normed(std::span<const Resultant> resultants) {
  if (resultants.empty()) throw ValidationError("at least one resultant is required");
  for (const auto& r : resultants) {
    if (!r.normed) throw ValidationError("averaging requires normed resultants");
  }
}

void require_omega(std::span<const Resultant> resultants, const WeightSystem& omega) {
  if (omega.size() != static_cast<Index>(resultants.size())) {
    throw ValidationError("weight system size does not match the number of resultants");
  }
}

void require_feasible(const RankHOperator& r, const Weights& w) {
  if (r.basis.rows() != w.size() || r.basis.cols() != r.spectrum.size() || r.spectrum.size() == 0) {
    throw ValidationError("rank-H operator has inconsistent dimensions");
  }
  if (std::abs(r.spectrum.norm() - 1.0) > 1e-8) throw ValidationError("rank-H operator is not normed");
}

double arccos_sq(double h) {
  const double a = std::acos(std::clamp(h, -1.0, 1.0));
  return a * a;
}

// 2 arccos(h) / sqrt(1 - h^2), with its limit 2 near h = 1.
double chain_factor(double h) {
  if (h > 1.0 - kSingularH) return 2.0;
  const double c = std::max(h, -1.0 + kSingularH);
  return 2.0 * std::acos(c) / std::sqrt(1.0 - c * c);
}

// h_k = [R_k | R] for all k.
Vector projections(const RankHOperator& r, const OperatorRefs& ops, const Weights& w) {
  const Matrix q = kernels::quadratic_forms(ops, r.basis, w);
  return q * r.spectrum;
}

double objective_from(const Vector& h, const WeightSystem& omega) {
  double g = 0.0;
  for (Index k = 0; k < h.size(); ++k) g -= omega.values()[k] * arccos_sq(h[k]);
  return g;
}

// W-orthonormal frame spanning the columns of f: F (F' W F)^{-1/2}.
Matrix w_orthonormalize(const Matrix& f, const Weights& w) {
  return w_orthonormal_polar(w.values().asDiagonal() * f, w);
}

// Best rank-H approximation of alpha * prev + beta * next, computed in the
// span of [U_prev, U_next] instead of on the dense n x n operator.
RankHOperator combine_truncated(const RankHOperator& prev, const RankHOperator& next, double alpha, double beta,
                                Index h, const Weights& w) {
  const Index hp = prev.rank();
  const Index hn = next.rank();
  Matrix f(prev.basis.rows(), hp + hn);
  f << prev.basis, next.basis;
  Vector d(hp + hn);
  d << alpha * prev.spectrum, beta * next.spectrum;

  const Matrix gram = f.transpose() * w.values().asDiagonal() * f;
  Eigen::SelfAdjointEigenSolver<Matrix> gs(0.5 * (gram + gram.transpose()));
  const Vector& s = gs.eigenvalues();
  const double floor = 1e-12 * s.maxCoeff();
  std::vector<Index> keep;
  for (Index i = 0; i < s.size(); ++i) {
    if (s[i] > floor) keep.push_back(i);
  }
  Matrix v(gram.rows(), static_cast<Index>(keep.size()));
  Vector sk(static_cast<Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    v.col(static_cast<Index>(i)) = gs.eigenvectors().col(keep[i]);
    sk[static_cast<Index>(i)] = s[keep[i]];
  }
  const Matrix q = f * v * sk.cwiseSqrt().cwiseInverse().asDiagonal();
  const Matrix half = sk.cwiseSqrt().asDiagonal() * v.transpose();
  const Matrix t = half * d.asDiagonal() * half.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> ts(0.5 * (t + t.transpose()));
  const Index r = ts.eigenvalues().size();
  if (r < h) throw NumericalError("combined operator has rank below H");

  RankHOperator out;
  out.spectrum = ts.eigenvalues().tail(h).reverse().cwiseMax(0.0);
  const double norm = out.spectrum.norm();
  if (!(norm > 0.0)) throw NumericalError("combined operator vanished");
  out.spectrum /= norm;
  out.basis = q * ts.eigenvectors().rightCols(h).rowwise().reverse();
  fix_column_signs(out.basis);
  return out;
}

template <class F>
double golden_section_max(F&& f, int iters, double* best_value, double lo = 0.0, double hi = 1.0) {
  const double start = lo;
  const double end = hi;
  double c = hi - kGolden * (hi - lo);
  double d = lo + kGolden * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kGolden * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kGolden * (hi - lo);
      fd = f(d);
    }
  }
  // Endpoints are candidates too; ties favour the smaller step.
  double best_tau = start;
  double best = f(start);
  for (double tau : {0.5 * (lo + hi), end}) {
    const double v = f(tau);
    if (v > best) {
      best = v;
      best_tau = tau;
    }
  }
  *best_value = best;
  return best_tau;
}

// Line search on a rank-preserving path between two factored points.
RankHOperator factor_arc_search(const RankHOperator& prev, const RankHOperator& next, const OperatorRefs& ops,
                                const WeightSystem& omega, const Weights& w, int iters, double* value) {
  auto point = [&](double tau) {
    RankHOperator p;
    p.spectrum = (1.0 - tau) * prev.spectrum + tau * next.spectrum;
    p.spectrum /= p.spectrum.norm();
    p.basis = tau == 0.0 ? prev.basis : w_orthonormalize((1.0 - tau) * prev.basis + tau * next.basis, w);
    return p;
  };
  auto g = [&](double tau) {
    try {
      return objective_from(projections(point(tau), ops, w), omega);
    } catch (const NumericalError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  const double tau = golden_section_max(g, iters, value);
  return point(tau).sorted();
}

// Search tau > 1 on the truncated path through prev and next, starting
// from the value at tau = 1. Brackets by doubling, then golden section.
double extrapolate(const RankHOperator& prev, const RankHOperator& next, const OperatorRefs& ops,
                   const WeightSystem& omega, Index h, const Weights& w, int iters, double g_one, double* tau) {
  auto g = [&](double t) {
    try {
      const RankHOperator p = combine_truncated(prev, next, 1.0 - t, t, h, w);
      if (!(p.spectrum.minCoeff() > 0.0)) return -std::numeric_limits<double>::infinity();
      return objective_from(projections(p, ops, w), omega);
    } catch (const NumericalError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  double best_t = 1.0;
  double best = g_one;
  double hi = 2.0;
  double g_hi = g(hi);
  while (g_hi > best && hi < kMaxExtrapolation) {
    best_t = hi;
    best = g_hi;
    hi *= 2.0;
    g_hi = g(hi);
  }
  *tau = 1.0;
  if (best_t == 1.0) return g_one;
  double value = best;
  const double t = golden_section_max(g, iters, &value, 0.5 * best_t, hi);
  if (value > best) {
    *tau = t;
    return value;
  }
  *tau = best_t;
  return best;
}

GeodesicGradients gradients_from(const RankHOperator& r, const OperatorRefs& ops, const WeightSystem& omega,
                                 const Weights& w) {
  const Matrix q = kernels::quadratic_forms(ops, r.basis, w);
  const Vector h = q * r.spectrum;
  Vector coeff(h.size());
  for (Index k = 0; k < h.size(); ++k) coeff[k] = omega.values()[k] * chain_factor(h[k]);
  GeodesicGradients out;
  out.lambda = q.transpose() * coeff;
  const Matrix b = kernels::weighted_sum(ops, coeff);
  out.basis = 2.0 * w.values().asDiagonal() * (b * r.basis) * r.spectrum.asDiagonal();
  return out;
}

// Polar factor of Gamma for the iteration. Columns of U whose Gamma column
// vanishes (lambda_h ~ 0, or B of rank below H) do not affect g; the tie is
// broken towards the current U by a small W U term.
Matrix iteration_polar(const Matrix& gamma, const Matrix& u, const Weights& w) {
  try {
    return w_orthonormal_polar(gamma, w);
  } catch (const NumericalError&) {
    const double scale = std::max(gamma.norm(), 1.0) * kTieBreak;
    return w_orthonormal_polar(gamma + scale * (w.values().asDiagonal() * u), w);
  }
}

RankHOperator step_from(const GeodesicGradients& grad, int* clamped, const Weights& w, const Matrix* tie_break) {
  Vector lambda = grad.lambda;
  int events = 0;
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < 0.0) {
      lambda[i] = 0.0;
      ++events;
    }
  }
  if (clamped) *clamped = events;
  const double norm = lambda.norm();
  if (!(norm > 0.0)) throw NumericalError("geodesic gradient vanishes: point is already critical");
  RankHOperator next;
  next.spectrum = lambda / norm;
  next.basis = tie_break ? iteration_polar(grad.basis, *tie_break, w) : w_orthonormal_polar(grad.basis, w);
  return next;
}

double residual_from(const RankHOperator& r, const GeodesicGradients& grad, const Weights& w) {
  const Vector lambda = grad.lambda.cwiseMax(0.0);
  const double ln = lambda.norm();
  if (!(ln > 0.0)) return std::numeric_limits<double>::infinity();
  double res_l = (r.spectrum - lambda / ln).norm();
  const Matrix v = iteration_polar(grad.basis, r.basis, w);
  double sq = 0.0;
  for (Index h = 0; h < v.cols(); ++h) {
    sq += std::min((r.basis.col(h) - v.col(h)).squaredNorm(), (r.basis.col(h) + v.col(h)).squaredNorm());
  }
  return std::max(res_l, std::sqrt(sq));
}

}  // namespace

OperatorRefs refs_of(std::span<const Resultant> resultants) {
  OperatorRefs out;
  out.reserve(resultants.size());
  for (const auto& r : resultants) out.push_back(&r.op);
  return out;
}

Matrix RankHOperator::to_operator(const Weights& w) const {
  return basis * spectrum.asDiagonal() * basis.transpose() * w.values().asDiagonal();
}

RankHOperator RankHOperator::sorted() const {
  std::vector<Index> order(static_cast<std::size_t>(spectrum.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return spectrum[a] > spectrum[b]; });
  RankHOperator out;
  out.spectrum.resize(spectrum.size());
  out.basis.resize(basis.rows(), basis.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.spectrum[static_cast<Index>(i)] = spectrum[order[i]];
    out.basis.col(static_cast<Index>(i)) = basis.col(order[i]);
  }
  fix_column_signs(out.basis);
  return out;
}

double rank_h_dot(const RankHOperator& a, const RankHOperator& b, const Weights& w) {
  const Matrix c = a.basis.transpose() * w.values().asDiagonal() * b.basis;
  return (a.spectrum.asDiagonal() * c * b.spectrum.asDiagonal()).cwiseProduct(c).sum();
}

WeightSystem::WeightSystem(Vector omega) : omega_(std::move(omega)) {
  if (omega_.size() == 0) throw ValidationError("weight system must not be empty");
  if (omega_.minCoeff() < 0.0) throw ValidationError("weight system entries must be non-negative");
  if (std::abs(omega_.sum() - 1.0) > 1e-12) throw ValidationError("weight system must sum to 1");
}

WeightSystem WeightSystem::uniform(Index k) {
  if (k <= 0) throw ValidationError("weight system must not be empty");
  return WeightSystem(Vector::Constant(k, 1.0 / static_cast<double>(k)));
}

RankCriterion RankCriterion::trace_ratio(double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("trace-ratio threshold must lie in [0, 1]");
  RankCriterion c;
  c.kind = Kind::trace_ratio;
  c.theta = theta;
  return c;
}

RankCriterion RankCriterion::cattell() {
  RankCriterion c;
  c.kind = Kind::cattell;
  return c;
}

RankCriterion RankCriterion::fixed(Index h) {
  if (h < 1) throw ValidationError("fixed rank must be at least 1");
  RankCriterion c;
  c.kind = Kind::fixed;
  c.rank = h;
  return c;
}

std::string RankCriterion::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::trace_ratio:
      os << "trace_ratio(" << theta << ")";
      break;
    case Kind::cattell:
      os << "cattell";
      break;
    case Kind::fixed:
      os << "fixed(" << rank << ")";
      break;
  }
  return os.str();
}

Resultant weighted_average(std::span<const Resultant> resultants, const WeightSystem& omega) {
  require_normed(resultants);
  require_omega(resultants, omega);
  Resultant out;
  out.op = kernels::weighted_sum(refs_of(resultants), omega.values());
  out.normed = false;
  return out;
}

Resultant sphere_average(std::span<const Resultant> resultants, const WeightSystem& omega) {
  Resultant out = weighted_average(resultants, omega);
  const double norm = std::sqrt(std::max(0.0, spsd_dot(out.op, out.op)));
  if (!(norm > 1e-300)) throw NumericalError("weighted average is zero");
  out.op /= norm;
  out.normed = true;
  return out;
}

RankHOperator truncate_rank(const Matrix& op, Index h, const Weights& w) {
  if (h < 1) throw ValidationError("rank H must be at least 1");
  const WEigen eig = w_spsd_eigen(op, w);
  if (eig.values.size() < h) {
    throw ValidationError("rank H = " + std::to_string(h) + " exceeds the numerical rank " +
                          std::to_string(eig.values.size()));
  }
  RankHOperator out;
  out.basis = eig.vectors.leftCols(h);
  out.spectrum = eig.values.head(h) / eig.values.head(h).norm();
  return out;
}

RankHOperator rank_h_average_euclidean(std::span<const Resultant> resultants, const WeightSystem& omega, Index h,
                                       const Weights& w) {
  return truncate_rank(weighted_average(resultants, omega).op, h, w);
}

Index choose_rank(const Vector& ev, const RankCriterion& criterion) {
  if (ev.size() == 0) throw ValidationError("empty spectrum");
  if (ev.minCoeff() < 0.0) throw ValidationError("spectrum must be non-negative");
  const Index rank = numerical_rank(ev);
  if (rank == 0) throw ValidationError("all-zero spectrum");
  switch (criterion.kind) {
    case RankCriterion::Kind::fixed:
      return std::min(criterion.rank, rank);
    case RankCriterion::Kind::trace_ratio: {
      if (criterion.theta <= 0.0) return 1;
      if (criterion.theta >= 1.0) return rank;
      const double total = ev.sum();
      double cum = 0.0;
      for (Index h = 0; h < rank; ++h) {
        cum += ev[h];
        if (cum / total >= criterion.theta - 1e-12) return h + 1;
      }
      return rank;
    }
    case RankCriterion::Kind::cattell: {
      if (ev.size() < 3) return 1;
      Index best = 1;
      double best_diff = -std::numeric_limits<double>::infinity();
      for (Index i = 1; i + 1 < ev.size(); ++i) {
        const double diff = ev[i - 1] - 2.0 * ev[i] + ev[i + 1];
        if (diff > best_diff) {
          best_diff = diff;
          best = i + 1;
        }
      }
      return std::min(best, rank);
    }
  }
  return 1;
}

double geodesic_objective(const RankHOperator& r, std::span<const Resultant> resultants, const WeightSystem& omega,
                          const Weights& w) {
  require_normed(resultants);
  require_omega(resultants, omega);
  require_feasible(r, w);
  return objective_from(projections(r, refs_of(resultants), w), omega);
}

GeodesicGradients geodesic_gradients(const RankHOperator& r, std::span<const Resultant> resultants,
                                     const WeightSystem& omega, const Weights& w) {
  require_normed(resultants);
  require_omega(resultants, omega);
  if (r.basis.rows() != w.size() || r.basis.cols() != r.spectrum.size()) {
    throw ValidationError("rank-H operator has inconsistent dimensions");
  }
  return gradients_from(r, refs_of(resultants), omega, w);
}

RankHOperator geodesic_step(const RankHOperator& r, std::span<const Resultant> resultants, const WeightSystem& omega,
                            const Weights& w, int* clamped) {
  require_feasible(r, w);
  return step_from(geodesic_gradients(r, resultants, omega, w), clamped, w, nullptr);
}

ArcSearch arc_line_search(const RankHOperator& prev, const RankHOperator& next, std::span<const Resultant> resultants,
                          const WeightSystem& omega, const Weights& w) {
  require_normed(resultants);
  require_omega(resultants, omega);
  require_feasible(prev, w);
  require_feasible(next, w);
  const OperatorRefs ops = refs_of(resultants);
  const Vector a = projections(prev, ops, w);
  const Vector b = projections(next, ops, w);
  const double c = rank_h_dot(prev, next, w);
  if (c <= -1.0 + 1e-12) throw NumericalError("degenerate arc: endpoints are antipodal");

  auto norm_at = [c](double tau) {
    return std::sqrt((1.0 - tau) * (1.0 - tau) + tau * tau + 2.0 * tau * (1.0 - tau) * c);
  };
  auto g = [&](double tau) {
    const double n = norm_at(tau);
    double val = 0.0;
    for (Index k = 0; k < a.size(); ++k) val -= omega.values()[k] * arccos_sq(((1.0 - tau) * a[k] + tau * b[k]) / n);
    return val;
  };
  ArcSearch out;
  out.tau = golden_section_max(g, 60, &out.objective);
  const Matrix rp = prev.to_operator(w);
  const Matrix rn = next.to_operator(w);
  out.op = (rp + out.tau * (rn - rp)) / norm_at(out.tau);
  return out;
}

double fixed_point_residual(const RankHOperator& r, std::span<const Resultant> resultants, const WeightSystem& omega,
                            const Weights& w) {
  return residual_from(r, geodesic_gradients(r, resultants, omega, w), w);
}

GeodesicAverage rank_h_average_geodesic(std::span<const Resultant> resultants, const WeightSystem& omega, Index h,
                                        const Weights& w, const GeodesicOptions& options) {
  const OperatorRefs ops = refs_of(resultants);
  GeodesicAverage out;
  RankHOperator cur = rank_h_average_euclidean(resultants, omega, h, w);
  double g_cur = objective_from(projections(cur, ops, w), omega);
  out.objective_trace.push_back(g_cur);
  std::optional<RankHOperator> prev_iter;

  for (int it = 0; it < options.max_iter; ++it) {
    const GeodesicGradients grad = gradients_from(cur, ops, omega, w);
    if (residual_from(cur, grad, w) <= options.residual_tol * 1e-3) break;  // exact fixed point
    int clamped = 0;
    const RankHOperator next = step_from(grad, &clamped, w, &cur.basis);
    out.clamped_events += clamped;

    // Line search on the operator arc, then back to rank H in the span of
    // both endpoints. Truncation can lose ground, in which case the step is
    // redone on the rank-preserving factor path, which contains the
    // current point.
    const Vector a = projections(cur, ops, w);
    const Vector b = projections(next, ops, w);
    const double c = rank_h_dot(cur, next, w);
    auto arc_value = [&](double tau) {
      const double n = std::sqrt((1.0 - tau) * (1.0 - tau) + tau * tau + 2.0 * tau * (1.0 - tau) * c);
      double val = 0.0;
      for (Index k = 0; k < a.size(); ++k) val -= omega.values()[k] * arccos_sq(((1.0 - tau) * a[k] + tau * b[k]) / n);
      return val;
    };
    double arc_best = 0.0;
    const double tau = golden_section_max(arc_value, options.golden_iters, &arc_best);
    RankHOperator cand = cur;
    double g_cand = g_cur;
    if (tau > 0.0) {
      try {
        cand = combine_truncated(cur, next, 1.0 - tau, tau, h, w);
        g_cand = objective_from(projections(cand, ops, w), omega);
      } catch (const NumericalError&) {
        cand = cur;
        g_cand = g_cur;
      }
    }
    if (tau >= 1.0 && g_cand > g_cur) {
      // The arc optimum sits at the far end: keep going past the step.
      double t_ext = 1.0;
      const double g_ext = extrapolate(cur, next, ops, omega, h, w, options.golden_iters, g_cand, &t_ext);
      if (t_ext > 1.0 && g_ext > g_cand) {
        cand = combine_truncated(cur, next, 1.0 - t_ext, t_ext, h, w);
        g_cand = g_ext;
      }
    }
    if (!(g_cand > g_cur)) {
      double value = 0.0;
      RankHOperator alt = factor_arc_search(cur, next, ops, omega, w, options.golden_iters, &value);
      const double g_alt = objective_from(projections(alt, ops, w), omega);
      if (g_alt > g_cur) {
        cand = std::move(alt);
        g_cand = g_alt;
        ++out.fallback_steps;
      } else {
        // Gains below rounding: the plain step is still taken while the
        // residual says the point is not stationary.
        const double g_next = objective_from(projections(next, ops, w), omega);
        if (residual_from(cur, grad, w) <= options.residual_tol ||
            g_next < g_cur - kObjectiveNoise * std::max(1.0, std::abs(g_cur))) {
          break;  // no ascent available along either path
        }
        cand = next;
        g_cand = g_next;
        ++out.plain_steps;
      }
    }
    if (prev_iter && g_cand > g_cur) {
      // Parallel-tangent step: extrapolate from the previous iterate
      // through the candidate, which cuts across the zig-zag of plain steps.
      double t_ext = 1.0;
      const double g_ext = extrapolate(*prev_iter, cand, ops, omega, h, w, options.golden_iters, g_cand, &t_ext);
      if (t_ext > 1.0 && g_ext > g_cand) {
        cand = combine_truncated(*prev_iter, cand, 1.0 - t_ext, t_ext, h, w);
        g_cand = g_ext;
      }
    }
    const double gain = g_cand - g_cur;
    prev_iter = cur;
    cur = std::move(cand);
    g_cur = g_cand;
    out.objective_trace.push_back(g_cur);
    out.iterations = it + 1;
    if (gain < options.objective_tol && fixed_point_residual(cur, resultants, omega, w) <= options.residual_tol) {
      break;
    }
  }
  out.residual = fixed_point_residual(cur, resultants, omega, w);
  out.converged = out.residual <= options.residual_tol;
  out.average = std::move(cur);
  return out;
}

}  // namespace varclust
