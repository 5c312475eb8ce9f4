// Command-line front end: cluster, average, simulate, mds.

#include <exception>
#include <iostream>

#include "CLI11.hpp"

#include "varclust/commands.hpp"
#include "varclust/errors.hpp"

namespace vc = varclust::cli;

namespace {

void add_data_flags(CLI::App* app, vc::DataOptions& o) {
  app->add_option("--data", o.data, "CSV file (header row)");
  app->add_option("--manifest", o.manifest, "key = value dataset manifest");
  app->add_option("--ignore", o.ignore, "columns to skip")->delimiter(',');
  app->add_option("--categorical", o.categorical, "columns read as categorical")->delimiter(',');
  app->add_option("--out-dir", o.out_dir, "output directory")->capture_default_str();
  app->add_option("--distance", o.distance, "chord or geodesic")->check(CLI::IsMember({"chord", "geodesic"}));
  app->add_option("--criterion", o.criterion, "rank criterion")->check(CLI::IsMember({"trace", "cattell", "fixed"}));
  app->add_option("--theta", o.theta, "trace-ratio threshold in [0, 1]");
  app->add_option("--H", o.h, "fixed rank");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering of variable structures as operators on the unit sphere"};
  app.require_subcommand(1);

  vc::ClusterOptions cluster;
  auto* c = app.add_subcommand("cluster", "K-means over variables with rank-H centroids");
  add_data_flags(c, cluster);
  c->add_option("--L", cluster.clusters, "number of clusters");
  c->add_option("--seed", cluster.seed, "master seed");
  c->add_option("--starts", cluster.starts, "random starts");
  c->add_option("--max-iter", cluster.max_iter, "k-means iteration cap");
  c->add_option("--scan", cluster.scan, "also fit L = 1..N and write the inertia curve");

  vc::AverageOptions average;
  auto* a = app.add_subcommand("average", "Rank-H average of all variables");
  add_data_flags(a, average);
  a->add_option("--hmax", average.h_max, "largest H of the geodesic inertia profile");

  vc::SimulateOptions simulate;
  auto* s = app.add_subcommand("simulate", "Benchmark on simulated three-cluster data");
  s->add_option("--n", simulate.ns, "sample sizes")->delimiter(',');
  s->add_option("--beta", simulate.betas, "angles, e.g. pi/4")->delimiter(',');
  s->add_option("--sigma2", simulate.sigma2s, "noise variances")->delimiter(',');
  s->add_option("--theta", simulate.thetas, "trace-ratio thresholds")->delimiter(',');
  s->add_option("--reps", simulate.replications, "replications per cell (default 20)");
  s->add_option("--seed", simulate.seed, "master seed");
  s->add_option("--starts", simulate.starts, "random starts per fit");
  s->add_option("--distance", simulate.distance, "chord or geodesic")->check(CLI::IsMember({"chord", "geodesic"}));
  s->add_option("--mixing", simulate.mixing, "how cluster B's axis is tied to A (default independent)")
      ->check(CLI::IsMember({"independent", "in_plane"}));
  s->add_option("--out-dir", simulate.out_dir, "output directory")->capture_default_str();
  s->add_option("--out", simulate.out, "benchmark CSV name; a .json of the same stem is written beside it")
      ->capture_default_str();

  vc::MdsOptions mds;
  auto* m = app.add_subcommand("mds", "Classical scaling of cluster centroids");
  m->add_option("--model", mds.model, "model.json written by `cluster`")->required();
  m->add_option("--dims", mds.dims, "output dimensions")->capture_default_str();
  m->add_option("--out-dir", mds.out_dir, "output directory")->capture_default_str();
  m->add_option("--out", mds.out, "coordinates CSV name; a .json of the same stem is written beside it")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? vc::kOk : vc::kValidation;
  }

  try {
    if (c->parsed()) return vc::run_cluster(cluster);
    if (a->parsed()) return vc::run_average(average);
    if (s->parsed()) return vc::run_simulate(simulate);
    if (m->parsed()) return vc::run_mds(mds);
  } catch (const varclust::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return vc::kValidation;
  } catch (const varclust::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return vc::kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return vc::kValidation;
  }
  return vc::kOk;
}
