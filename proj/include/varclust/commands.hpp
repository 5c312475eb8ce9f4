#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "varclust/averaging.hpp"
#include "varclust/dataset.hpp"
#include "varclust/operator_space.hpp"

namespace varclust::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kValidation = 2, kNumerical = 3, kNotConverged = 4 };

/// Flags shared by the data-driven commands. Unset optionals fall back to
/// the manifest's settings, then to built-in defaults.
struct DataOptions {
  std::optional<std::filesystem::path> data;
  std::optional<std::filesystem::path> manifest;
  std::vector<std::string> ignore;
  std::vector<std::string> categorical;
  std::filesystem::path out_dir = ".";
  std::optional<std::string> distance;
  std::optional<std::string> criterion;
  std::optional<double> theta;
  std::optional<Index> h;
};

struct ClusterOptions : DataOptions {
  std::optional<Index> clusters;
  std::optional<std::uint64_t> seed;
  std::optional<int> starts;
  std::optional<int> max_iter;
  std::optional<Index> scan;
};

struct AverageOptions : DataOptions {
  std::optional<Index> h_max;
};

struct SimulateOptions {
  std::vector<Index> ns;
  std::vector<std::string> betas;
  std::vector<double> sigma2s;
  std::vector<double> thetas;
  std::optional<int> replications;
  std::optional<std::uint64_t> seed;
  std::optional<int> starts;
  std::optional<std::string> distance;
  std::optional<std::string> mixing;
  std::filesystem::path out_dir = ".";
  std::filesystem::path out = "benchmark.csv";  // relative to out_dir
};

struct MdsOptions {
  std::filesystem::path model;
  Index dims = 2;
  std::filesystem::path out_dir = ".";
  std::filesystem::path out = "mds.csv";  // relative to out_dir
};

/// Loaded data plus the manifest it came from.
struct LoadedData {
  DatasetManifest manifest;
  Dataset dataset;
  std::vector<Resultant> resultants;
};

LoadedData load_data(const DataOptions& options);

/// Resolves criterion flags: --H implies fixed, otherwise --criterion with
/// --theta (default trace ratio 0.5).
RankCriterion resolve_criterion(const DataOptions& options, const DatasetManifest& manifest);

/// Accepts a decimal angle in radians or pi, pi/k, a*pi/k.
double parse_angle(const std::string& text);

int run_cluster(const ClusterOptions& options);
int run_average(const AverageOptions& options);
int run_simulate(const SimulateOptions& options);
int run_mds(const MdsOptions& options);

}  // namespace varclust::cli
