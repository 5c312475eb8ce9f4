// Runs the nine acceptance criteria and prints one PASS/FAIL/SKIP line each.
// Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>

#include "support.hpp"
#include "varclust/clustering.hpp"
#include "varclust/commands.hpp"
#include "varclust/simulation.hpp"

using namespace varclust;
using namespace testing;
namespace fs = std::filesystem;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Vector random_omega(Index k, Rng& rng) {
  Vector o(k);
  for (Index i = 0; i < k; ++i) o[i] = uniform(rng, 0.1, 1.0);
  return o / o.sum();
}

// 1. Phi^2 as a trace of two categorical projectors vs the contingency table.
Outcome phi2_identity() {
  Rng rng(1001);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int lx = uniform_int(rng, 2, 6), ly = uniform_int(rng, 2, 6);
    const Index n = uniform_int(rng, std::max(lx, ly), 200);
    const Weights w = random_weights(n, rng);
    const auto x = random_labels(n, lx, rng), y = random_labels(n, ly, rng);
    const Matrix px = resultant(encode_categorical(x, w), w, false).op;
    const Matrix py = resultant(encode_categorical(y, w), w, false).op;
    worst = std::max(worst, std::abs(spsd_dot(py, px) - contingency_phi2(x, y, w)));
  }
  return verdict(worst <= 1e-10, fmt("max |trace - contingency| = %.2e over 200 pairs", worst));
}

// 2. sum w_k ||R_k - R||^2 = sum w_k ||R_k - Rbar||^2 + ||R - Rbar||^2.
Outcome huygens() {
  Rng rng(1002);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Weights w = random_weights(6, rng);
    const auto rs = random_resultants(5, 6, w, rng);
    const Vector om = random_omega(5, rng);
    const Matrix bar = weighted_average(rs, WeightSystem(om)).op;
    const Matrix r = random_resultant(6, uniform_int(rng, 1, 3), w, rng).op;
    double lhs = 0.0, rhs = entrywise_dot(r - bar, r - bar, w);
    for (int k = 0; k < 5; ++k) {
      lhs += om[k] * entrywise_dot(rs[k].op - r, rs[k].op - r, w);
      rhs += om[k] * entrywise_dot(rs[k].op - bar, rs[k].op - bar, w);
    }
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return verdict(worst <= 1e-10, fmt("max |lhs - rhs| = %.2e over 100 systems", worst));
}

// 3. Euclidean rank-1 average at n = 3 against 1e5 random candidates.
Outcome euclidean_optimality() {
  Rng rng(1003);
  double worst = 1e300;
  for (int t = 0; t < 20; ++t) {
    const Weights w = random_weights(3, rng);
    const auto rs = random_resultants(3, 3, w, rng, 2);
    const Vector om = Vector::Constant(3, 1.0 / 3.0);
    auto objective = [&](const Matrix& r) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += om[k] * 2.0 * (1.0 - spsd_dot(rs[k].op, r));
      return s;
    };
    const double best = objective(rank_h_average_euclidean(rs, WeightSystem(om), 1, w).to_operator(w));
    const Matrix wd = w.values().asDiagonal();
    for (int i = 0; i < 100000; ++i) {
      Vector x = normal_vector(3, rng);
      x /= w_norm(x, w);
      worst = std::min(worst, objective(x * x.transpose() * wd) - best);
    }
  }
  return verdict(worst >= -1e-12, fmt("min(candidate - average) = %.3e over 20 x 1e5 candidates", worst));
}

// g(U, lambda) from dense traces, U unconstrained.
double objective_free(const Matrix& u, const Vector& l, const std::vector<Resultant>& rs, const Vector& om,
                      const Weights& w) {
  const Matrix wd = w.values().asDiagonal();
  double g = 0.0;
  for (std::size_t k = 0; k < rs.size(); ++k) {
    double h = 0.0;
    for (Index j = 0; j < u.cols(); ++j) h += l[j] * (u.col(j).transpose() * wd * rs[k].op * u.col(j))(0);
    g -= om[static_cast<Index>(k)] * std::pow(std::acos(std::clamp(h, -1.0, 1.0)), 2);
  }
  return g;
}

// 4. Exact gradients vs central differences.
Outcome gradients() {
  Rng rng(1004);
  const double eps = 1e-6;
  double worst = 0.0;
  int points = 0;
  while (points < 50) {
    const Index n = uniform_int(rng, 4, 9), h = uniform_int(rng, 1, 3);
    const Weights w = random_weights(n, rng);
    const auto rs = random_resultants(uniform_int(rng, 2, 6), n, w, rng);
    const Vector om = random_omega(static_cast<Index>(rs.size()), rng);
    const RankHOperator r = random_rank_h(n, h, w, rng);
    bool near_one = false;
    for (const auto& rk : rs) near_one |= spsd_dot(rk.op, dense(r, w)) > 1.0 - 1e-3;
    if (near_one) continue;
    ++points;
    const GeodesicGradients g = geodesic_gradients(r, rs, WeightSystem(om), w);
    Vector fl(h);
    for (Index j = 0; j < h; ++j) {
      Vector lp = r.spectrum, lm = r.spectrum;
      lp[j] += eps;
      lm[j] -= eps;
      fl[j] = (objective_free(r.basis, lp, rs, om, w) - objective_free(r.basis, lm, rs, om, w)) / (2 * eps);
    }
    Matrix fu(n, h);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < h; ++j) {
        Matrix up = r.basis, um = r.basis;
        up(i, j) += eps;
        um(i, j) -= eps;
        fu(i, j) = (objective_free(up, r.spectrum, rs, om, w) - objective_free(um, r.spectrum, rs, om, w)) / (2 * eps);
      }
    worst = std::max({worst, (g.lambda - fl).norm() / fl.norm(), (g.basis - fu).norm() / fu.norm()});
  }
  return verdict(worst <= 1e-5, fmt("max relative error = %.2e over 50 points", worst));
}

// 5. Monotone objective trace and fixed-point residual.
Outcome monotonicity() {
  Rng rng(1005);
  double worst_drop = 0.0, worst_res = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Index n = uniform_int(rng, 5, 12);
    const Weights w = random_weights(n, rng);
    const auto rs = random_resultants(uniform_int(rng, 2, 10), n, w, rng);
    const WeightSystem om(random_omega(static_cast<Index>(rs.size()), rng));
    const Index rank = w_spsd_eigen(weighted_average(rs, om).op, w).values.size();
    const Index h = uniform_int(rng, 1, static_cast<int>(std::min<Index>(rank, 4)));
    const GeodesicAverage g = rank_h_average_geodesic(rs, om, h, w);
    for (std::size_t i = 1; i < g.objective_trace.size(); ++i)
      worst_drop = std::max(worst_drop, g.objective_trace[i - 1] - g.objective_trace[i]);
    worst_res = std::max(worst_res, fixed_point_residual(g.average, rs, om, w));
  }
  return verdict(worst_drop <= 1e-12 && worst_res <= 1e-6,
                 fmt("largest decrease = %.2e, largest residual = %.2e over 50 instances", worst_drop, worst_res));
}

// 6. Desk-scale benchmark.
Outcome benchmark() {
  constexpr double pi = std::numbers::pi;
  auto run = [](Index n, std::vector<double> betas, std::vector<double> thetas) {
    BenchmarkGrid g;
    g.ns = {n};
    g.betas = std::move(betas);
    g.sigma2s = {0.1};
    g.thetas = std::move(thetas);
    g.replications = 30;
    g.seed = 2024;
    return run_benchmark(g).rows;
  };
  const auto a = run(40, {pi / 2}, {0.0, 1.0});
  const double t0 = a[0].mean_rand, t1 = a[1].mean_rand;
  const auto b = run(30, {pi / 4, pi / 3, pi / 2}, {1.0});
  const double b4 = b[0].mean_rand, b3 = b[1].mean_rand, b2 = b[2].mean_rand;
  const bool order = t1 <= 0.05 && t1 < t0 && b4 > b3 && b3 > b2;
  const bool close = std::abs(t1 - 0.004) <= 0.05 && std::abs(t0 - 0.075) <= 0.05 && std::abs(b4 - 0.134) <= 0.05 &&
                     std::abs(b3 - 0.046) <= 0.05 && std::abs(b2 - 0.008) <= 0.05;
  return verdict(order && close,
                 fmt("n=40 pi/2: theta=1 %.4f (0.004), theta=0 %.4f (0.075); n=30 theta=1: pi/4 %.4f (0.134), "
                     "pi/3 %.4f (0.046), pi/2 %.4f (0.008); orderings %s, absolute %s",
                     t1, t0, b4, b3, b2, order ? "hold" : "violated", close ? "within 0.05" : "off by more than 0.05"));
}

// 7. Wine data: D_H profile and two-cluster centroid cosine.
Outcome wine() {
  fs::path csv = fs::path(VARCLUST_SOURCE_DIR) / "data" / "wine.csv";
  if (const char* env = std::getenv("VARCLUST_WINE_CSV")) csv = env;
  if (!fs::exists(csv)) return {Status::skip, "wine CSV not found (run tools/fetch_wine_data.py or set VARCLUST_WINE_CSV)"};
  cli::DataOptions o;
  o.manifest = fs::path(VARCLUST_SOURCE_DIR) / "data" / "wine.manifest";
  o.data = csv;
  const cli::LoadedData d = cli::load_data(o);
  const Weights& w = d.dataset.weights;
  const InertiaProfile p = geodesic_inertia_profile(d.resultants, 4, w);
  const double ref[4] = {36.00564, 32.55528, 32.06235, 31.82901};
  bool dh_ok = true;
  std::string dh;
  for (int h = 0; h < 4; ++h) {
    dh_ok &= std::abs(p.values[static_cast<std::size_t>(h)] - ref[h]) <= 0.05;
    dh += fmt("D%d %.4f (%.3f) ", h + 1, p.values[static_cast<std::size_t>(h)], ref[h]);
  }
  ClusteringConfig cfg;
  cfg.clusters = 2;
  cfg.distance = DistanceKind::geodesic;
  cfg.criterion = RankCriterion::trace_ratio(0.5);
  const ClusterModel m = kmeans(d.resultants, cfg, w);
  const double cos = centroid_separation(m, w)(0, 1);
  const bool cos_ok = std::abs(cos - 0.376) <= 0.02;
  return verdict(dh_ok && cos_ok, dh + fmt("; centroid cosine %.4f (0.376)", cos));
}

// 8. Invariances.
Outcome invariances() {
  Rng rng(1008);
  double scale = 0.0, dropped = 0.0, polar_gap = 1e300;
  int mismatches = 0;
  for (int t = 0; t < 100; ++t) {
    const Index n = uniform_int(rng, 5, 20);
    const Weights w = random_weights(n, rng);
    // Sign and scale of data and metric.
    const Matrix x = normal_matrix(n, uniform_int(rng, 1, 4), rng);
    const Matrix m = random_spd(x.cols(), rng);
    const double alpha = (uniform(rng) < 0.5 ? -1.0 : 1.0) * uniform(rng, 0.01, 100.0);
    const Resultant a = resultant(encode_block(x, m, w), w);
    const Resultant b = resultant(encode_block(alpha * x, uniform(rng, 0.01, 100.0) * m, w), w);
    scale = std::max(scale, max_abs_diff(a.op, b.op));
    const Vector v = normal_vector(n, rng);
    scale = std::max(scale, max_abs_diff(resultant(encode_numeric(v, w), w).op, resultant(encode_numeric(alpha * v, w), w).op));

    // Projector built with each possible dropped level against the library's.
    const int levels = uniform_int(rng, 2, std::min<int>(6, static_cast<int>(n)));
    const auto lab = random_labels(n, levels, rng);
    const Matrix lib = resultant(encode_categorical(lab, w), w, false).op;
    Matrix ind = Matrix::Zero(n, levels);
    for (Index i = 0; i < n; ++i) ind(i, lab[static_cast<std::size_t>(i)]) = 1.0;
    const Matrix wd = w.values().asDiagonal();
    for (int drop = 0; drop < levels; ++drop) {
      Matrix keep(n, levels - 1);
      for (int c = 0, k = 0; c < levels; ++c)
        if (c != drop) keep.col(k++) = ind.col(c);
      const Matrix xc = center_columns(keep, w);
      const Matrix pi = xc * (xc.transpose() * wd * xc).inverse() * xc.transpose() * wd;
      dropped = std::max(dropped, max_abs_diff(pi, lib));
    }

    // Scalar-product argmax vs dense chord-distance argmin.
    std::vector<RankHOperator> cents;
    const int l = uniform_int(rng, 2, 5);
    for (int c = 0; c < l; ++c) cents.push_back(random_rank_h(n, uniform_int(rng, 1, 3), w, rng));
    const Resultant r = random_resultant(n, uniform_int(rng, 1, 3), w, rng);
    Index arg = 0;
    double best = 1e300;
    for (int c = 0; c < l; ++c) {
      const Matrix diff = r.op - dense(cents[static_cast<std::size_t>(c)], w);
      const double dist = entrywise_dot(diff, diff, w);
      if (dist < best) {
        best = dist;
        arg = c;
      }
    }
    mismatches += assign(r, cents, DistanceKind::chord, w) != arg;
    mismatches += assign(r, cents, DistanceKind::geodesic, w) != arg;

    // Polar factor maximizes tr(U'G) over W-orthonormal frames.
    const Index h = uniform_int(rng, 1, static_cast<int>(std::min<Index>(n, 4)));
    const Matrix g = normal_matrix(n, h, rng);
    const double top = (w_orthonormal_polar(g, w).transpose() * g).trace();
    for (int i = 0; i < 200; ++i) polar_gap = std::min(polar_gap, top - (random_w_orthonormal(n, h, w, rng).transpose() * g).trace());
  }
  const bool ok = scale <= 1e-10 && dropped <= 1e-10 && mismatches == 0 && polar_gap >= -1e-12;
  return verdict(ok, fmt("scale %.1e, dropped level %.1e, assignment mismatches %d, polar gap %.2e (100 instances each)",
                         scale, dropped, mismatches, polar_gap));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 9. Each CLI command run twice with the same seed.
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "varclust_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    Rng rng(1009);
    const Matrix latent = normal_matrix(40, 3, rng);
    std::ofstream out(root / "t.csv");
    out << "id,a1,a2,a3,b1,b2,c1,c2,c3,grp\n";
    const int src[9] = {0, 0, 0, 1, 1, 2, 2, 2, 0};
    for (Index i = 0; i < 40; ++i) {
      out << i;
      for (int j = 0; j < 9; ++j) {
        if (j == 8) {
          out << ',' << (latent(i, 0) > 0 ? "p" : "q");
        } else {
          out << ',' << latent(i, src[j]) + 0.4 * normal_vector(1, rng)[0];
        }
      }
      out << '\n';
    }
  }
  const std::string cli = VARCLUST_CLI;
  const std::string data = "--data " + (root / "t.csv").string() + " --ignore id --categorical grp";
  const std::vector<std::pair<std::string, std::string>> commands{
      {"cluster_chord", "cluster " + data + " --L 3 --seed 7 --scan 4 --out-dir {}"},
      {"cluster_geodesic", "cluster " + data + " --L 3 --seed 7 --distance geodesic --out-dir {}"},
      {"average", "average " + data + " --distance geodesic --H 2 --hmax 3 --out-dir {}"},
      {"simulate", "simulate --n 20 --beta pi/3,pi/2 --theta 0,1 --reps 4 --seed 3 --out-dir {} --out bench.csv"},
      {"mds", "mds --model " + (root / "cluster_chord" / "run1" / "model.json").string() + " --out-dir {}"},
  };
  int files = 0;
  for (const auto& [name, args] : commands) {
    for (const char* run : {"run1", "run2"}) {
      const fs::path dir = root / name / run;
      fs::create_directories(dir);
      std::string line = args;
      line.replace(line.find("{}"), 2, dir.string());
      const std::string cmd = "\"" + cli + "\" " + line + " > \"" + (dir / "stdout.txt").string() + "\" 2> \"" +
                              (root / name / (std::string(run) + ".stderr")).string() + "\"";
      if (std::system(cmd.c_str()) != 0) {
        return {Status::fail, name + " exited with an error: " + slurp(root / name / (std::string(run) + ".stderr"))};
      }
    }
    for (const auto& e : fs::directory_iterator(root / name / "run1")) {
      const fs::path other = root / name / "run2" / e.path().filename();
      if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
        return {Status::fail, name + ": " + e.path().filename().string() + " differs between runs"};
      }
      ++files;
    }
  }
  fs::remove_all(root);
  return {Status::pass, fmt("%d output files byte-identical across 5 commands", files)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"phi2 two-path identity", phi2_identity},
      {"Huygens identity", huygens},
      {"euclidean rank-H optimality", euclidean_optimality},
      {"geodesic gradients", gradients},
      {"geodesic monotonicity and residual", monotonicity},
      {"desk-scale benchmark", benchmark},
      {"wine data", wine},
      {"invariance suite", invariances},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    failed += o.status == Status::fail;
    std::printf("%s criterion %zu (%s): %s [%.1fs]\n", tag, i + 1, criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
