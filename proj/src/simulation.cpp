#include "varclust/simulation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <numbers>
#include <ostream>

#include "varclust/clustering.hpp"
#include "varclust/csv_format.hpp"
#include "varclust/errors.hpp"

namespace varclust {

namespace {

constexpr int kNumericA = 7;
constexpr int kNumericB = 5;
constexpr int kNumericC = 5;
constexpr int kLevels = 5;

Vector normal_vector(Index n, double sd, Rng& rng) {
  std::normal_distribution<double> dist(0.0, sd);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

std::uint64_t bits(double x) { return std::bit_cast<std::uint64_t>(x); }

}  // namespace

void SimConfig::validate() const {
  if (n < 5) throw ValidationError("sample size must be at least 5");
  if (!(sigma2 > 0.0)) throw ValidationError("noise variance must be positive");
  if (!(beta > 0.0 && beta <= std::numbers::pi / 2 + 1e-15)) throw ValidationError("beta must lie in (0, pi/2]");
}

const char* to_string(Mixing mixing) { return mixing == Mixing::in_plane ? "in_plane" : "independent"; }

Mixing parse_mixing(const std::string& name) {
  if (name == "in_plane") return Mixing::in_plane;
  if (name == "independent") return Mixing::independent;
  throw ValidationError("unknown mixing '" + name + "' (expected in_plane or independent)");
}

Latents simulate_latents(Index n, double beta, Rng& rng, Mixing mixing) {
  const Weights w = Weights::uniform(n);
  for (int attempt = 0; attempt < 100; ++attempt) {
    Vector xi1 = center(normal_vector(n, 1.0, rng), w);
    Vector xi2 = center(normal_vector(n, 1.0, rng), w);
    Vector xi3 = center(normal_vector(n, 1.0, rng), w);
    Vector xi4 = center(normal_vector(n, 1.0, rng), w);
    const double d11 = xi1.dot(xi1);
    if (!(d11 > 0.0)) continue;
    xi2 -= (xi2.dot(xi1) / d11) * xi1;
    if (xi2.norm() <= 1e-10 * std::sqrt(d11)) continue;  // xi1 parallel to xi2
    Latents out;
    try {
      out.xi1 = standardize(xi1, w);
      out.xi2 = standardize(xi2, w);
      out.xi3 = standardize(xi3, w);
      out.xi4 = standardize(xi4, w);
      out.xi3 = mixing == Mixing::in_plane ? standardize(out.xi2 * std::cos(beta) + out.xi1 * std::sin(beta), w)
                                          : standardize(out.xi3 * std::sin(beta) + out.xi1 * std::cos(beta), w);
    } catch (const ValidationError&) {
      continue;
    }
    return out;
  }
  throw NumericalError("could not draw non-degenerate latent variables");
}

std::vector<int> quintile_levels(const Vector& xi) {
  const Index n = xi.size();
  if (n < kLevels) throw ValidationError("need at least 5 observations for quintiles");
  std::vector<double> sorted(xi.data(), xi.data() + n);
  std::sort(sorted.begin(), sorted.end());
  // q_{j/5} is the order statistic of rank ceil(j n / 5).
  std::vector<double> q(kLevels);
  for (int j = 1; j <= kLevels; ++j) {
    const Index rank = (static_cast<Index>(j) * n + kLevels - 1) / kLevels;
    q[static_cast<std::size_t>(j - 1)] = sorted[static_cast<std::size_t>(rank - 1)];
  }
  std::vector<int> levels(static_cast<std::size_t>(n));
  std::vector<int> counts(kLevels, 0);
  for (Index i = 0; i < n; ++i) {
    int j = 0;
    while (j < kLevels - 1 && xi[i] > q[static_cast<std::size_t>(j)]) ++j;
    levels[static_cast<std::size_t>(i)] = j;
    ++counts[static_cast<std::size_t>(j)];
  }
  for (int c : counts) {
    if (c == 0) throw NumericalError("empty quintile bin (tied latent values)");
  }
  return levels;
}

SimSample simulate_sample(const SimConfig& config, Rng& rng) {
  config.validate();
  const Latents lat = simulate_latents(config.n, config.beta, rng, config.mixing);
  const double sd = std::sqrt(config.sigma2);
  SimSample s;
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int j = 0; j < kNumericA; ++j) {
    const double a = angle(rng);
    s.numeric.push_back(std::cos(a) * lat.xi1 + std::sin(a) * lat.xi2 + normal_vector(config.n, sd, rng));
    s.truth.push_back(0);
  }
  for (int j = 0; j < kNumericB; ++j) {
    s.numeric.push_back(lat.xi3 + normal_vector(config.n, sd, rng));
    s.truth.push_back(1);
  }
  for (int j = 0; j < kNumericC; ++j) {
    s.numeric.push_back(lat.xi4 + normal_vector(config.n, sd, rng));
    s.truth.push_back(2);
  }
  for (const Vector* xi : {&lat.xi1, &lat.xi2, &lat.xi3, &lat.xi4}) s.categorical.push_back(quintile_levels(*xi));
  s.truth.insert(s.truth.end(), {0, 0, 1, 2});
  return s;
}

std::vector<Resultant> encode_sample(const SimSample& sample, const Weights& w) {
  std::vector<Resultant> out;
  int idx = 1;
  for (const Vector& x : sample.numeric) {
    out.push_back(resultant(encode_numeric(x, w, "x" + std::to_string(idx++)), w));
  }
  for (const auto& c : sample.categorical) {
    out.push_back(resultant(encode_categorical(c, w, "x" + std::to_string(idx++), kLevels), w));
  }
  return out;
}

double rand_index(std::span<const Index> p, std::span<const Index> q) {
  if (p.size() != q.size()) throw ValidationError("partitions must cover the same items");
  long either = 0;
  long one = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const bool in_p = p[i] == p[j];
      const bool in_q = q[i] == q[j];
      if (in_p || in_q) ++either;
      if (in_p != in_q) ++one;
    }
  }
  return either == 0 ? 0.0 : static_cast<double>(one) / static_cast<double>(either);
}

void BenchmarkGrid::validate() const {
  if (ns.empty() || betas.empty() || sigma2s.empty() || thetas.empty()) throw ValidationError("empty benchmark grid");
  for (Index n : ns) SimConfig{n, betas.front(), sigma2s.front()}.validate();
  for (double b : betas) SimConfig{ns.front(), b, sigma2s.front()}.validate();
  for (double s : sigma2s) SimConfig{ns.front(), betas.front(), s}.validate();
  for (double t : thetas) {
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("theta must lie in [0, 1]");
  }
  if (replications < 1) throw ValidationError("replications must be at least 1");
  if (n_starts < 1 || max_iter < 1) throw ValidationError("n_starts and max_iter must be positive");
}

BenchmarkResult run_benchmark(const BenchmarkGrid& grid) {
  grid.validate();
  BenchmarkResult result;
  const auto reps = static_cast<std::size_t>(grid.replications);
  const std::size_t nt = grid.thetas.size();
  for (Index n : grid.ns) {
    for (double sigma2 : grid.sigma2s) {
      for (double beta : grid.betas) {
        const SimConfig cell{n, beta, sigma2, grid.mixing};
        std::vector<std::vector<double>> scores(reps, std::vector<double>(nt, 0.0));
        std::vector<std::vector<std::string>> errors(reps, std::vector<std::string>(nt));
#pragma omp parallel for schedule(dynamic)
        for (std::size_t r = 0; r < reps; ++r) {
          const std::uint64_t sample_seed =
              derive_seed(grid.seed, {static_cast<std::uint64_t>(n), bits(beta), bits(sigma2), r});
          std::vector<Resultant> resultants;
          SimSample sample;
          try {
            Rng rng(sample_seed);
            sample = simulate_sample(cell, rng);
            resultants = encode_sample(sample, Weights::uniform(n));
          } catch (const std::exception& e) {
            for (auto& msg : errors[r]) msg = e.what();
            continue;
          }
          const Weights w = Weights::uniform(n);
          for (std::size_t t = 0; t < nt; ++t) {
            try {
              ClusteringConfig cfg;
              cfg.clusters = grid.clusters;
              cfg.distance = grid.distance;
              cfg.criterion = RankCriterion::trace_ratio(grid.thetas[t]);
              cfg.n_starts = grid.n_starts;
              cfg.max_iter = grid.max_iter;
              cfg.seed = derive_seed(sample_seed, {1});
              const ClusterModel model = kmeans(resultants, cfg, w);
              scores[r][t] = rand_index(model.assignments, sample.truth);
            } catch (const std::exception& e) {
              errors[r][t] = e.what();
            }
          }
        }
        for (std::size_t t = 0; t < nt; ++t) {
          BenchmarkRow row{n, beta, sigma2, grid.thetas[t], 0.0, 0.0, grid.replications, 0};
          std::vector<double> ok;
          for (std::size_t r = 0; r < reps; ++r) {
            if (errors[r][t].empty()) {
              ok.push_back(scores[r][t]);
            } else {
              ++row.failures;
              result.warnings.push_back("n=" + std::to_string(n) + " beta=" + format_double(beta) +
                                        " sigma2=" + format_double(sigma2) + " theta=" +
                                        format_double(grid.thetas[t]) + " replication " + std::to_string(r) +
                                        " failed: " + errors[r][t]);
            }
          }
          if (!ok.empty()) {
            double sum = 0.0;
            for (double v : ok) sum += v;
            row.mean_rand = sum / static_cast<double>(ok.size());
            if (ok.size() > 1) {
              double ss = 0.0;
              for (double v : ok) ss += (v - row.mean_rand) * (v - row.mean_rand);
              row.sd_rand = std::sqrt(ss / static_cast<double>(ok.size() - 1));
            }
          } else {
            row.mean_rand = std::numeric_limits<double>::quiet_NaN();
            row.sd_rand = std::numeric_limits<double>::quiet_NaN();
          }
          result.rows.push_back(row);
        }
      }
    }
  }
  return result;
}

void write_benchmark_csv(std::ostream& out, std::span<const BenchmarkRow> rows) {
  out << "n,beta,sigma2,theta,mean_rand,sd_rand,replications,failures\n";
  for (const auto& r : rows) {
    out << r.n << ',' << format_double(r.beta) << ',' << format_double(r.sigma2) << ',' << format_double(r.theta)
        << ',' << format_double(r.mean_rand) << ',' << format_double(r.sd_rand) << ',' << r.replications << ','
        << r.failures << '\n';
  }
}

}  // namespace varclust
