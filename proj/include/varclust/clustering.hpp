#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "varclust/averaging.hpp"
#include "varclust/operator_space.hpp"

namespace varclust {

struct ClusteringConfig {
  Index clusters = 2;
  DistanceKind distance = DistanceKind::chord;
  RankCriterion criterion = RankCriterion::fixed(1);
  int max_iter = 100;
  int n_starts = 10;
  std::uint64_t seed = 0;
  GeodesicOptions geodesic;
};

struct ClusterModel {
  std::vector<Index> assignments;
  std::vector<RankHOperator> centroids;
  std::vector<Index> ranks;
  DistanceKind distance = DistanceKind::chord;
  RankCriterion criterion;
  double within_inertia = 0.0;
  double between_over_total = 0.0;
  bool converged = false;       // assignments reached a fixed point
  bool cycle_detected = false;  // stopped on a repeated assignment vector
  bool centroids_converged = true;  // every geodesic centroid met its tolerance
  int iterations = 0;
  int best_start = 0;
  int repairs = 0;
  /// Within-cluster inertia after every half-step of the best run
  /// (centroid update, then reassignment).
  std::vector<double> inertia_trace;
};

/**
 * K-means over normed resultants with rank-H centroids. Each start draws a
 * random partition; centroids are euclidean (chord) or geodesic rank-H
 * averages with H picked per cluster by the criterion. The best start by
 * within-cluster inertia is returned; starts run in parallel.
 */
ClusterModel kmeans(std::span<const Resultant> resultants, const ClusteringConfig& config, const Weights& w);

/// Closest centroid; ties go to the lowest index.
Index assign(const Resultant& r, std::span<const RankHOperator> centroids, DistanceKind distance, const Weights& w);

/// Row-wise assignment from a K x L matrix of scalar products.
std::vector<Index> assign_from_scores(const Matrix& scores, DistanceKind distance);

/// Centroid of a set of members under the given distance and criterion.
struct Centroid {
  RankHOperator average;
  Index rank = 0;
  bool converged = true;
};
Centroid cluster_centroid(std::span<const Resultant> members, DistanceKind distance, const RankCriterion& criterion,
                          const Weights& w, const GeodesicOptions& options = {});

struct MemberSummary {
  Index index = 0;
  Index cluster = 0;
  double cosine = 0.0;
  double chord = 0.0;
  double geodesic = 0.0;
};

/// Cosine, chord and geodesic distance of every resultant to its centroid.
std::vector<MemberSummary> cluster_summary(const ClusterModel& model, std::span<const Resultant> resultants,
                                           const Weights& w);

/// sum_k dist^2(R_k, centroid of its cluster) under the model's distance.
double within_inertia(const ClusterModel& model, std::span<const Resultant> resultants, const Weights& w);

/// (total - within) / total, total measured about the global rank-H average
/// chosen with the model's own criterion and distance.
double inertia_ratio(const ClusterModel& model, std::span<const Resultant> resultants, const Weights& w,
                     const GeodesicOptions& options = {});

struct InertiaProfile {
  std::vector<double> values;  // D_H for H = 1..H_max
  std::vector<bool> converged;
};

/// D_H = sum_k delta^2(R_k, global geodesic rank-H average), H = 1..h_max.
InertiaProfile geodesic_inertia_profile(std::span<const Resultant> resultants, Index h_max, const Weights& w,
                                        const GeodesicOptions& options = {});

/// L x L cosines between centroids, unit diagonal.
Matrix centroid_separation(const ClusterModel& model, const Weights& w);

struct MdsResult {
  Matrix coordinates;  // L x dims
  Vector eigenvalues;  // descending, of the double-centred matrix
  bool padded = false; // fewer positive eigenvalues than dims
};

/// Classical scaling of a distance matrix.
MdsResult classical_mds(const Matrix& distances, Index dims);

/// v[i-1] - 2 v[i] + v[i+1] for interior i; used to read an elbow off a curve.
std::vector<double> second_differences(const std::vector<double>& v);

}  // namespace varclust
