#include "varclust/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <set>

#include "varclust/errors.hpp"
#include "varclust/kernels.hpp"
#include "varclust/random.hpp"

namespace varclust {

namespace {

struct RunResult {
  ClusterModel model;
  std::exception_ptr error;
};

std::vector<Index> random_partition(Index k, Index l, Rng& rng) {
  std::vector<Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Index> labels(static_cast<std::size_t>(k), 0);
  std::uniform_int_distribution<Index> pick(0, l - 1);
  for (std::size_t i = 0; i < order.size(); ++i) {
    labels[static_cast<std::size_t>(order[i])] = i < static_cast<std::size_t>(l) ? static_cast<Index>(i) : pick(rng);
  }
  return labels;
}

std::vector<Matrix> materialize(std::span<const RankHOperator> centroids, const Weights& w) {
  std::vector<Matrix> ops;
  ops.reserve(centroids.size());
  for (const auto& c : centroids) ops.push_back(c.to_operator(w));
  return ops;
}

Matrix scores_against(std::span<const Resultant> resultants, std::span<const RankHOperator> centroids,
                      const Weights& w) {
  const std::vector<Matrix> ops = materialize(centroids, w);
  const OperatorRefs rows = refs_of(resultants);
  OperatorRefs cols;
  for (const auto& m : ops) cols.push_back(&m);
  return kernels::dot_matrix(rows, cols);
}

double within_from(const Matrix& scores, const std::vector<Index>& labels, DistanceKind distance) {
  double sum = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    sum += squared_distance_from_cos(scores(static_cast<Index>(k), labels[k]), distance);
  }
  return sum;
}

std::vector<Resultant> members_of(std::span<const Resultant> resultants, const std::vector<Index>& labels, Index l) {
  std::vector<Resultant> out;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == l) out.push_back(resultants[k]);
  }
  return out;
}

// Moves the worst-fitting resultant of a multi-member cluster into each
// empty cluster. Returns the number of moves.
int repair_empty(std::vector<Index>& labels, const Matrix& scores, DistanceKind distance, Index l) {
  int moves = 0;
  for (Index target = 0; target < l; ++target) {
    std::vector<Index> sizes(static_cast<std::size_t>(l), 0);
    for (Index c : labels) ++sizes[static_cast<std::size_t>(c)];
    if (sizes[static_cast<std::size_t>(target)] > 0) continue;
    Index worst = -1;
    double worst_d = -1.0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      const Index c = labels[k];
      if (sizes[static_cast<std::size_t>(c)] < 2) continue;
      const double d = squared_distance_from_cos(scores(static_cast<Index>(k), c), distance);
      if (d > worst_d) {
        worst_d = d;
        worst = static_cast<Index>(k);
      }
    }
    if (worst < 0) throw NumericalError("cannot repair an empty cluster");
    labels[static_cast<std::size_t>(worst)] = target;
    ++moves;
  }
  return moves;
}

ClusterModel run_once(std::span<const Resultant> resultants, const ClusteringConfig& config, const Weights& w,
                      std::uint64_t seed) {
  const auto k = static_cast<Index>(resultants.size());
  const Index l = config.clusters;
  Rng rng(seed);
  ClusterModel model;
  model.distance = config.distance;
  model.criterion = config.criterion;
  model.assignments = random_partition(k, l, rng);

  std::set<std::vector<Index>> seen;
  seen.insert(model.assignments);
  auto update = [&]() {
    model.centroids.clear();
    model.ranks.clear();
    model.centroids_converged = true;
    for (Index c = 0; c < l; ++c) {
      const std::vector<Resultant> members = members_of(resultants, model.assignments, c);
      Centroid cen = cluster_centroid(members, config.distance, config.criterion, w, config.geodesic);
      model.centroids.push_back(std::move(cen.average));
      model.ranks.push_back(cen.rank);
      model.centroids_converged = model.centroids_converged && cen.converged;
    }
  };

  for (int it = 0; it < config.max_iter; ++it) {
    update();
    const Matrix scores = scores_against(resultants, model.centroids, w);
    model.within_inertia = within_from(scores, model.assignments, config.distance);
    model.inertia_trace.push_back(model.within_inertia);
    model.iterations = it + 1;

    std::vector<Index> next = assign_from_scores(scores, config.distance);
    model.inertia_trace.push_back(within_from(scores, next, config.distance));
    model.repairs += repair_empty(next, scores, config.distance, l);
    if (next == model.assignments) {
      model.converged = true;
      return model;
    }
    if (!seen.insert(next).second) {
      model.cycle_detected = true;
      model.assignments = std::move(next);
      break;
    }
    model.assignments = std::move(next);
  }
  // Centroids must describe the final partition.
  update();
  model.within_inertia = within_from(scores_against(resultants, model.centroids, w), model.assignments,
                                     config.distance);
  return model;
}

}  // namespace

std::vector<Index> assign_from_scores(const Matrix& scores, DistanceKind distance) {
  if (scores.cols() == 0) throw ValidationError("no centroids to assign to");
  std::vector<Index> out(static_cast<std::size_t>(scores.rows()), 0);
  for (Index k = 0; k < scores.rows(); ++k) {
    Index best = 0;
    if (distance == DistanceKind::chord) {
      for (Index c = 1; c < scores.cols(); ++c) {
        if (scores(k, c) > scores(k, best)) best = c;
      }
    } else {
      double best_d = distance_from_cos(scores(k, 0), distance);
      for (Index c = 1; c < scores.cols(); ++c) {
        const double d = distance_from_cos(scores(k, c), distance);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
    }
    out[static_cast<std::size_t>(k)] = best;
  }
  return out;
}

Index assign(const Resultant& r, std::span<const RankHOperator> centroids, DistanceKind distance, const Weights& w) {
  if (!r.normed) throw ValidationError("assign requires a normed resultant");
  if (centroids.empty()) throw ValidationError("no centroids to assign to");
  Matrix scores(1, static_cast<Index>(centroids.size()));
  const Matrix* op_ptr = &r.op;
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const Matrix q = kernels::serial::quadratic_forms(kernels::OpSpan(&op_ptr, 1), centroids[c].basis, w);
    scores(0, static_cast<Index>(c)) = (q * centroids[c].spectrum)(0);
  }
  return assign_from_scores(scores, distance).front();
}

Centroid cluster_centroid(std::span<const Resultant> members, DistanceKind distance, const RankCriterion& criterion,
                          const Weights& w, const GeodesicOptions& options) {
  if (members.empty()) throw ValidationError("cannot average an empty cluster");
  const WeightSystem omega = WeightSystem::uniform(static_cast<Index>(members.size()));
  const Resultant avg = weighted_average(members, omega);
  const WEigen eig = w_spsd_eigen(avg.op, w);
  Centroid out;
  out.rank = choose_rank(eig.values, criterion);
  if (distance == DistanceKind::chord) {
    out.average.basis = eig.vectors.leftCols(out.rank);
    out.average.spectrum = eig.values.head(out.rank) / eig.values.head(out.rank).norm();
  } else {
    GeodesicAverage g = rank_h_average_geodesic(members, omega, out.rank, w, options);
    out.average = std::move(g.average);
    out.converged = g.converged;
  }
  return out;
}

ClusterModel kmeans(std::span<const Resultant> resultants, const ClusteringConfig& config, const Weights& w) {
  if (resultants.empty()) throw ValidationError("kmeans needs at least one resultant");
  for (const auto& r : resultants) {
    if (!r.normed) throw ValidationError("kmeans requires normed resultants");
  }
  if (config.clusters < 1) throw ValidationError("cluster count must be at least 1");
  if (config.max_iter < 1 || config.n_starts < 1) throw ValidationError("max_iter and n_starts must be positive");
  if (static_cast<Index>(resultants.size()) < config.clusters) {
    throw ValidationError("fewer resultants than clusters");
  }

  std::vector<RunResult> runs(static_cast<std::size_t>(config.n_starts));
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < config.n_starts; ++s) {
    try {
      runs[static_cast<std::size_t>(s)].model =
          run_once(resultants, config, w, derive_seed(config.seed, {static_cast<std::uint64_t>(s)}));
    } catch (...) {
      runs[static_cast<std::size_t>(s)].error = std::current_exception();
    }
  }
  int best = -1;
  for (int s = 0; s < config.n_starts; ++s) {
    const auto& run = runs[static_cast<std::size_t>(s)];
    if (run.error) std::rethrow_exception(run.error);
    if (best < 0 || run.model.within_inertia < runs[static_cast<std::size_t>(best)].model.within_inertia) best = s;
  }
  ClusterModel model = std::move(runs[static_cast<std::size_t>(best)].model);
  model.best_start = best;
  model.between_over_total = inertia_ratio(model, resultants, w, config.geodesic);
  return model;
}

std::vector<MemberSummary> cluster_summary(const ClusterModel& model, std::span<const Resultant> resultants,
                                           const Weights& w) {
  if (model.assignments.size() != resultants.size()) throw ValidationError("model does not match the resultants");
  const Matrix scores = scores_against(resultants, model.centroids, w);
  std::vector<MemberSummary> out;
  for (std::size_t k = 0; k < resultants.size(); ++k) {
    MemberSummary m;
    m.index = static_cast<Index>(k);
    m.cluster = model.assignments[k];
    m.cosine = scores(m.index, m.cluster);
    m.chord = distance_from_cos(m.cosine, DistanceKind::chord);
    m.geodesic = distance_from_cos(m.cosine, DistanceKind::geodesic);
    out.push_back(m);
  }
  return out;
}

double within_inertia(const ClusterModel& model, std::span<const Resultant> resultants, const Weights& w) {
  if (model.assignments.size() != resultants.size()) throw ValidationError("model does not match the resultants");
  return within_from(scores_against(resultants, model.centroids, w), model.assignments, model.distance);
}

double inertia_ratio(const ClusterModel& model, std::span<const Resultant> resultants, const Weights& w,
                     const GeodesicOptions& options) {
  const Centroid global = cluster_centroid(resultants, model.distance, model.criterion, w, options);
  const std::vector<RankHOperator> one{global.average};
  const Matrix scores = scores_against(resultants, one, w);
  double total = 0.0;
  for (Index k = 0; k < scores.rows(); ++k) total += squared_distance_from_cos(scores(k, 0), model.distance);
  if (!(total > 0.0)) throw NumericalError("total inertia is zero: all resultants coincide");
  const double within = within_inertia(model, resultants, w);
  return (total - within) / total;
}

InertiaProfile geodesic_inertia_profile(std::span<const Resultant> resultants, Index h_max, const Weights& w,
                                        const GeodesicOptions& options) {
  const WeightSystem omega = WeightSystem::uniform(static_cast<Index>(resultants.size()));
  const WEigen eig = w_spsd_eigen(weighted_average(resultants, omega).op, w);
  if (h_max < 1 || h_max > eig.values.size()) {
    throw ValidationError("H_max must lie in [1, " + std::to_string(eig.values.size()) + "]");
  }
  InertiaProfile out;
  const double k = static_cast<double>(resultants.size());
  for (Index h = 1; h <= h_max; ++h) {
    const GeodesicAverage g = rank_h_average_geodesic(resultants, omega, h, w, options);
    out.values.push_back(-k * g.objective_trace.back());
    out.converged.push_back(g.converged);
  }
  return out;
}

Matrix centroid_separation(const ClusterModel& model, const Weights& w) {
  const auto l = static_cast<Index>(model.centroids.size());
  Matrix cos(l, l);
  for (Index a = 0; a < l; ++a) {
    cos(a, a) = 1.0;
    for (Index b = a + 1; b < l; ++b) {
      cos(a, b) = cos(b, a) =
          rank_h_dot(model.centroids[static_cast<std::size_t>(a)], model.centroids[static_cast<std::size_t>(b)], w);
    }
  }
  return cos;
}

MdsResult classical_mds(const Matrix& d, Index dims) {
  if (d.rows() != d.cols() || d.rows() == 0) throw ValidationError("distance matrix must be square and non-empty");
  if (dims < 1) throw ValidationError("MDS needs at least one dimension");
  const Index m = d.rows();
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  for (Index i = 0; i < m; ++i) {
    if (std::abs(d(i, i)) > 1e-12 * scale) throw ValidationError("distance matrix must have a zero diagonal");
    for (Index j = 0; j < m; ++j) {
      if (d(i, j) < 0.0) throw ValidationError("distances must be non-negative");
      if (std::abs(d(i, j) - d(j, i)) > 1e-12 * scale) throw ValidationError("distance matrix must be symmetric");
    }
  }
  const Matrix j = Matrix::Identity(m, m) - Matrix::Constant(m, m, 1.0 / static_cast<double>(m));
  const Matrix b = -0.5 * j * d.cwiseProduct(d) * j;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (b + b.transpose()));
  MdsResult out;
  out.eigenvalues = es.eigenvalues().reverse();
  Matrix vecs = es.eigenvectors().rowwise().reverse();
  const double tol = 1e-12 * std::max(1.0, out.eigenvalues.cwiseAbs().maxCoeff());
  out.coordinates = Matrix::Zero(m, dims);
  for (Index c = 0; c < dims; ++c) {
    if (c >= m || out.eigenvalues[c] <= tol) {
      out.padded = true;
      continue;
    }
    Vector v = vecs.col(c);
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    out.coordinates.col(c) = v * std::sqrt(out.eigenvalues[c]);
  }
  return out;
}

std::vector<double> second_differences(const std::vector<double>& v) {
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) out.push_back(v[i - 1] - 2.0 * v[i] + v[i + 1]);
  return out;
}

}  // namespace varclust
