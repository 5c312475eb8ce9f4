#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "varclust/encoding.hpp"
#include "varclust/operator_space.hpp"
#include "varclust/random.hpp"

namespace varclust {

/// Four latent directions: xi1, xi2 span cluster A's plane, xi3 and xi4 are
/// the axes of clusters B and C.
struct Latents {
  Vector xi1, xi2, xi3, xi4;
};

/**
 * How the axis of cluster B is tied to cluster A's plane.
 *  - in_plane:    xi3 = xi2 cos(beta) + xi1 sin(beta). B then lies inside
 *                 A's plane for every beta and the fresh xi3 draw is unused.
 *  - independent: xi3 = xi3 sin(beta) + xi1 cos(beta), with xi3 the fresh
 *                 standardized draw, so B is uncorrelated with A in
 *                 expectation at beta = pi/2 and drifts into A's plane as
 *                 beta decreases.
 */
enum class Mixing { in_plane, independent };

const char* to_string(Mixing mixing);
/// Parses "in_plane" or "independent"; throws ValidationError otherwise.
Mixing parse_mixing(const std::string& name);

/// 17 numeric and 4 five-level categorical variables with their true clusters.
struct SimSample {
  std::vector<Vector> numeric;               // x1..x17
  std::vector<std::vector<int>> categorical;  // x18..x21, levels 0..4
  std::vector<Index> truth;                   // 21 labels: A = 0, B = 1, C = 2
};

struct SimConfig {
  Index n = 40;
  double beta = 1.5707963267948966;
  double sigma2 = 0.1;
  Mixing mixing = Mixing::independent;

  void validate() const;
};

/**
 * Draws four N(0,1) vectors, centres them, orthogonalizes xi2 against xi1,
 * standardizes all four, then mixes xi3 as described by `mixing` and
 * re-standardizes it. Uniform weights.
 */
Latents simulate_latents(Index n, double beta, Rng& rng, Mixing mixing = Mixing::independent);

SimSample simulate_sample(const SimConfig& config, Rng& rng);

/// Level 0..4 from the empirical quintiles, bins (q_{(j-1)/5}, q_{j/5}] with
/// the lowest bin closed below.
std::vector<int> quintile_levels(const Vector& xi);

/// Normed resultants of the 21 variables, in sample order.
std::vector<Resultant> encode_sample(const SimSample& sample, const Weights& w);

/**
 * Partition discrepancy: pairs co-clustered in exactly one partition over
 * pairs co-clustered in at least one. 0 iff both partitions have the same
 * co-clustering relation. This is a Jaccard distance on co-clustered pairs,
 * not the classical Rand index.
 */
double rand_index(std::span<const Index> p, std::span<const Index> q);

struct BenchmarkGrid {
  std::vector<Index> ns{30, 40};
  std::vector<double> betas{0.7853981633974483, 1.0471975511965976, 1.5707963267948966};
  std::vector<double> sigma2s{0.1, 0.15};
  std::vector<double> thetas{0.0, 0.25, 0.5, 0.75, 1.0};
  int replications = 100;
  std::uint64_t seed = 0;
  Index clusters = 3;
  int n_starts = 10;
  int max_iter = 100;
  DistanceKind distance = DistanceKind::chord;
  Mixing mixing = Mixing::independent;

  void validate() const;
};

struct BenchmarkRow {
  Index n = 0;
  double beta = 0.0;
  double sigma2 = 0.0;
  double theta = 0.0;
  double mean_rand = 0.0;
  double sd_rand = 0.0;
  int replications = 0;
  int failures = 0;
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;
  std::vector<std::string> warnings;
};

/// Every (n, beta, sigma2) cell is sampled `replications` times; each sample
/// is clustered once per theta. Replications run in parallel.
BenchmarkResult run_benchmark(const BenchmarkGrid& grid);

void write_benchmark_csv(std::ostream& out, std::span<const BenchmarkRow> rows);

}  // namespace varclust
