#include "varclust/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "varclust/clustering.hpp"
#include "varclust/csv_format.hpp"
#include "varclust/errors.hpp"
#include "varclust/simulation.hpp"

namespace varclust::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size() || t.empty()) {
    throw ValidationError(what + ": cannot parse '" + text + "' as a number");
  }
  return v;
}

template <class T>
T parse_integer(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  T v{};
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size() || t.empty()) {
    throw ValidationError(what + ": cannot parse '" + text + "' as an integer");
  }
  return v;
}

// Flag value, else manifest setting, else nothing.
template <class T, class Parse>
std::optional<T> layered(const std::optional<T>& flag, const DatasetManifest& m, const std::string& key,
                         Parse parse) {
  if (flag) return flag;
  const auto it = m.settings.find(key);
  if (it == m.settings.end()) return std::nullopt;
  return parse(it->second, "manifest key '" + key + "'");
}

std::optional<std::string> layered_string(const std::optional<std::string>& flag, const DatasetManifest& m,
                                          const std::string& key) {
  if (flag) return flag;
  const auto it = m.settings.find(key);
  if (it == m.settings.end()) return std::nullopt;
  return trim(it->second);
}

DistanceKind resolve_distance(const DataOptions& o, const DatasetManifest& m) {
  const auto d = layered_string(o.distance, m, "distance");
  return d ? parse_distance(*d) : DistanceKind::chord;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  return out;
}

void write_json(const fs::path& path, const Json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

Json criterion_json(const RankCriterion& c) {
  Json j;
  switch (c.kind) {
    case RankCriterion::Kind::trace_ratio:
      j["kind"] = "trace";
      j["theta"] = c.theta;
      break;
    case RankCriterion::Kind::cattell:
      j["kind"] = "cattell";
      break;
    case RankCriterion::Kind::fixed:
      j["kind"] = "fixed";
      j["H"] = c.rank;
      break;
  }
  return j;
}

std::vector<Resultant> resultants_of(const Dataset& ds) {
  std::vector<Resultant> out;
  out.reserve(ds.structures.size());
  for (const auto& s : ds.structures) out.push_back(resultant(s, ds.weights));
  return out;
}

void write_matrix_csv(const fs::path& path, const Matrix& m, const std::string& row_name, const std::string& col_prefix,
                      Index first = 1) {
  auto out = open_output(path);
  out << row_name;
  for (Index c = 0; c < m.cols(); ++c) out << ',' << col_prefix << (c + first);
  out << '\n';
  for (Index r = 0; r < m.rows(); ++r) {
    out << (r + first);
    for (Index c = 0; c < m.cols(); ++c) out << ',' << format_double(m(r, c));
    out << '\n';
  }
}

}  // namespace

double parse_angle(const std::string& text) {
  const std::string t = trim(text);
  const auto pi = t.find("pi");
  if (pi == std::string::npos) return parse_double(t, "angle");
  double num = 1.0;
  double den = 1.0;
  std::string head = trim(t.substr(0, pi));
  if (!head.empty()) {
    if (head.back() != '*') throw ValidationError("angle: cannot parse '" + text + "'");
    head.pop_back();
    num = parse_double(head, "angle");
  }
  const std::string tail = trim(t.substr(pi + 2));
  if (!tail.empty()) {
    if (tail.front() != '/') throw ValidationError("angle: cannot parse '" + text + "'");
    den = parse_double(tail.substr(1), "angle");
    if (den == 0.0) throw ValidationError("angle: division by zero in '" + text + "'");
  }
  return num * std::numbers::pi / den;
}

LoadedData load_data(const DataOptions& o) {
  DatasetManifest m;
  if (o.manifest) {
    m = read_manifest_file(*o.manifest);
  } else {
    if (!o.data) throw ValidationError("either --data or --manifest is required");
    m.numeric_rest = true;
  }
  if (o.data) m.path = *o.data;
  if (m.path.empty()) throw ValidationError("manifest has no 'data' entry and --data was not given");
  for (const auto& c : o.ignore) {
    std::erase_if(m.columns, [&](const auto& p) { return p.first == c; });
    if (std::find(m.ignore.begin(), m.ignore.end(), c) == m.ignore.end()) m.ignore.push_back(c);
  }
  for (const auto& c : o.categorical) {
    std::erase_if(m.columns, [&](const auto& p) { return p.first == c; });
    m.columns.emplace_back(c, ColumnKind::categorical);
  }
  const CsvTable table = read_csv_file(m.path);
  resolve_manifest(m, table);
  LoadedData out{m, ingest(m, table), {}};
  out.resultants = resultants_of(out.dataset);
  return out;
}

RankCriterion resolve_criterion(const DataOptions& o, const DatasetManifest& m) {
  const auto h = layered(o.h, m, "H", parse_integer<Index>);
  const auto theta = layered(o.theta, m, "theta", parse_double);
  auto name = layered_string(o.criterion, m, "criterion");
  // An explicit H on the command line selects the fixed criterion unless a
  // criterion flag says otherwise.
  if (!o.criterion && o.h) name = "fixed";
  if (!name) name = h ? "fixed" : "trace";
  if (*name == "fixed") {
    if (!h) throw ValidationError("criterion 'fixed' needs --H");
    return RankCriterion::fixed(*h);
  }
  if (*name == "trace") return RankCriterion::trace_ratio(theta.value_or(0.5));
  if (*name == "cattell") return RankCriterion::cattell();
  throw ValidationError("unknown criterion '" + *name + "' (expected trace, cattell or fixed)");
}

int run_cluster(const ClusterOptions& o) {
  const LoadedData data = load_data(o);
  const DatasetManifest& m = data.manifest;
  const Weights& w = data.dataset.weights;
  const auto& rs = data.resultants;

  ClusteringConfig config;
  config.clusters = layered(o.clusters, m, "L", parse_integer<Index>).value_or(2);
  config.distance = resolve_distance(o, m);
  config.criterion = resolve_criterion(o, m);
  config.seed = layered(o.seed, m, "seed", parse_integer<std::uint64_t>).value_or(0);
  config.n_starts = layered(o.starts, m, "starts", parse_integer<int>).value_or(10);
  config.max_iter = layered(o.max_iter, m, "max_iter", parse_integer<int>).value_or(100);

  const ClusterModel model = kmeans(rs, config, w);
  const std::vector<MemberSummary> summary = cluster_summary(model, rs, w);
  const Matrix sep = centroid_separation(model, w);
  const auto& structures = data.dataset.structures;

  {
    auto out = open_output(o.out_dir / "assignments.csv");
    out << "variable,kind,cluster\n";
    for (std::size_t k = 0; k < structures.size(); ++k) {
      out << csv_escape(structures[k].label) << ',' << to_string(structures[k].kind) << ','
          << model.assignments[k] + 1 << '\n';
    }
  }
  {
    auto out = open_output(o.out_dir / "cosines.csv");
    out << "cluster,variable,cosine,chord,geodesic\n";
    for (Index c = 0; c < config.clusters; ++c) {
      for (const auto& s : summary) {
        if (s.cluster != c) continue;
        out << c + 1 << ',' << csv_escape(structures[static_cast<std::size_t>(s.index)].label) << ','
            << format_double(s.cosine) << ',' << format_double(s.chord) << ',' << format_double(s.geodesic) << '\n';
      }
    }
  }
  write_matrix_csv(o.out_dir / "centroid_cosines.csv", sep, "cluster", "cluster_");

  Json j;
  j["command"] = "cluster";
  Json cfg;
  cfg["data"] = m.path.generic_string();
  cfg["L"] = config.clusters;
  cfg["distance"] = to_string(config.distance);
  cfg["criterion"] = criterion_json(config.criterion);
  cfg["seed"] = config.seed;
  cfg["starts"] = config.n_starts;
  cfg["max_iter"] = config.max_iter;
  j["config"] = cfg;
  j["variables"] = structures.size();
  j["observations"] = w.size();
  j["iterations"] = model.iterations;
  j["converged"] = model.converged;
  j["cycle_detected"] = model.cycle_detected;
  j["centroids_converged"] = model.centroids_converged;
  j["best_start"] = model.best_start;
  j["repairs"] = model.repairs;
  j["ranks"] = model.ranks;
  j["within_inertia"] = model.within_inertia;
  j["between_over_total"] = model.between_over_total;
  j["inertia_trace"] = model.inertia_trace;
  Json cos = Json::array();
  for (Index r = 0; r < sep.rows(); ++r) {
    std::vector<double> row;
    for (Index c = 0; c < sep.cols(); ++c) row.push_back(sep(r, c));
    cos.push_back(row);
  }
  j["centroid_cosines"] = cos;

  if (o.scan) {
    if (*o.scan < 1) throw ValidationError("--scan must be at least 1");
    std::vector<double> ratios;
    for (Index l = 1; l <= *o.scan; ++l) {
      ClusteringConfig c = config;
      c.clusters = l;
      ratios.push_back(kmeans(rs, c, w).between_over_total);
    }
    const std::vector<double> d2 = second_differences(ratios);
    auto out = open_output(o.out_dir / "inertia_scan.csv");
    out << "L,between_over_total,second_difference\n";
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      out << i + 1 << ',' << format_double(ratios[i]) << ',';
      if (i >= 1 && i - 1 < d2.size()) out << format_double(d2[i - 1]);
      out << '\n';
    }
    j["inertia_scan"] = ratios;
  }
  write_json(o.out_dir / "model.json", j);

  if (!model.converged || !model.centroids_converged) {
    std::cerr << "warning: clustering did not converge"
              << (model.cycle_detected ? " (assignment cycle)" : "")
              << (model.centroids_converged ? "" : " (geodesic centroid hit its iteration cap)") << '\n';
    return kNotConverged;
  }
  return kOk;
}

int run_average(const AverageOptions& o) {
  const LoadedData data = load_data(o);
  const DatasetManifest& m = data.manifest;
  const Weights& w = data.dataset.weights;
  const auto& rs = data.resultants;
  const DistanceKind distance = resolve_distance(o, m);
  const RankCriterion criterion = resolve_criterion(o, m);
  const WeightSystem omega = WeightSystem::uniform(static_cast<Index>(rs.size()));

  const Resultant mean = weighted_average(rs, omega);
  const Vector spectrum = w_spsd_spectrum(mean.op, w);
  const Index rank = numerical_rank(spectrum);
  const Index h = choose_rank(spectrum, criterion);
  {
    auto out = open_output(o.out_dir / "spectrum.csv");
    out << "component,eigenvalue,share,cumulative_share\n";
    const double total = spectrum.sum();
    double cum = 0.0;
    for (Index i = 0; i < spectrum.size(); ++i) {
      cum += spectrum[i];
      out << i + 1 << ',' << format_double(spectrum[i]) << ',' << format_double(spectrum[i] / total) << ','
          << format_double(cum / total) << '\n';
    }
  }

  RankHOperator avg;
  bool converged = true;
  Json j;
  j["command"] = "average";
  Json cfg;
  cfg["data"] = m.path.generic_string();
  cfg["distance"] = to_string(distance);
  cfg["criterion"] = criterion_json(criterion);
  j["config"] = cfg;
  j["numerical_rank"] = rank;
  j["H"] = h;
  if (distance == DistanceKind::geodesic) {
    const GeodesicAverage g = rank_h_average_geodesic(rs, omega, h, w);
    avg = g.average.sorted();
    converged = g.converged;
    j["iterations"] = g.iterations;
    j["converged"] = g.converged;
    j["residual"] = g.residual;
    j["objective_trace"] = g.objective_trace;
  } else {
    avg = rank_h_average_euclidean(rs, omega, h, w);
  }
  j["lambda"] = std::vector<double>(avg.spectrum.data(), avg.spectrum.data() + avg.spectrum.size());
  {
    auto out = open_output(o.out_dir / "factors.csv");
    out << "observation";
    for (Index c = 0; c < avg.rank(); ++c) out << ",u" << c + 1;
    out << '\n';
    for (Index r = 0; r < avg.basis.rows(); ++r) {
      out << r + 1;
      for (Index c = 0; c < avg.rank(); ++c) out << ',' << format_double(avg.basis(r, c));
      out << '\n';
    }
  }
  if (distance == DistanceKind::geodesic) {
    const Index h_max = layered(o.h_max, m, "hmax", parse_integer<Index>).value_or(h);
    if (h_max < 1) throw ValidationError("--hmax must be at least 1");
    if (h_max > rank) {
      throw ValidationError("--hmax = " + std::to_string(h_max) + " exceeds the numerical rank " +
                            std::to_string(rank));
    }
    const InertiaProfile p = geodesic_inertia_profile(rs, h_max, w);
    auto out = open_output(o.out_dir / "dh_profile.csv");
    out << "H,D_H,converged\n";
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      out << i + 1 << ',' << format_double(p.values[i]) << ',' << (p.converged[i] ? 1 : 0) << '\n';
      converged = converged && p.converged[i];
    }
    j["dh_profile"] = p.values;
  }
  write_json(o.out_dir / "average.json", j);
  if (!converged) {
    std::cerr << "warning: geodesic average did not reach its fixed-point tolerance\n";
    return kNotConverged;
  }
  return kOk;
}

int run_simulate(const SimulateOptions& o) {
  BenchmarkGrid grid;
  if (!o.ns.empty()) grid.ns = o.ns;
  if (!o.betas.empty()) {
    grid.betas.clear();
    for (const auto& b : o.betas) grid.betas.push_back(parse_angle(b));
  }
  if (!o.sigma2s.empty()) grid.sigma2s = o.sigma2s;
  if (!o.thetas.empty()) grid.thetas = o.thetas;
  grid.replications = o.replications.value_or(20);
  grid.seed = o.seed.value_or(0);
  if (o.starts) grid.n_starts = *o.starts;
  if (o.distance) grid.distance = parse_distance(*o.distance);
  if (o.mixing) grid.mixing = parse_mixing(*o.mixing);
  const BenchmarkResult result = run_benchmark(grid);
  const fs::path csv = o.out_dir / o.out;
  {
    auto out = open_output(csv);
    write_benchmark_csv(out, result.rows);
  }
  for (const auto& msg : result.warnings) std::cerr << "warning: " << msg << '\n';

  Json j;
  Json cfg;
  cfg["n"] = grid.ns;
  cfg["beta"] = grid.betas;
  cfg["sigma2"] = grid.sigma2s;
  cfg["theta"] = grid.thetas;
  cfg["replications"] = grid.replications;
  cfg["clusters"] = grid.clusters;
  cfg["starts"] = grid.n_starts;
  cfg["max_iter"] = grid.max_iter;
  cfg["distance"] = to_string(grid.distance);
  cfg["mixing"] = to_string(grid.mixing);
  j["command"] = "simulate";
  j["seed"] = grid.seed;
  j["config"] = cfg;
  j["output"] = o.out.generic_string();
  j["cells"] = result.rows.size();
  int failures = 0;
  for (const auto& r : result.rows) failures += r.failures;
  j["failures"] = failures;
  j["warnings"] = result.warnings;
  write_json(fs::path(csv).replace_extension(".json"), j);
  return kOk;
}

int run_mds(const MdsOptions& o) {
  std::ifstream in(o.model);
  if (!in) throw ValidationError("cannot read model file '" + o.model.string() + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError("model file is not valid JSON: " + std::string(e.what()));
  }
  if (!j.contains("centroid_cosines") || !j.contains("config")) {
    throw ValidationError("model file lacks centroid cosines; was it written by `cluster`?");
  }
  const DistanceKind distance = parse_distance(j["config"].value("distance", "chord"));
  const auto& cos = j["centroid_cosines"];
  const auto l = static_cast<Index>(cos.size());
  if (l < 2) throw ValidationError("MDS needs at least 2 centroids");
  Matrix d(l, l);
  for (Index r = 0; r < l; ++r) {
    if (static_cast<Index>(cos[r].size()) != l) throw ValidationError("centroid cosine matrix is not square");
    for (Index c = 0; c < l; ++c) d(r, c) = r == c ? 0.0 : distance_from_cos(cos[r][c].get<double>(), distance);
  }
  const MdsResult mds = classical_mds(d, o.dims);
  if (mds.padded) {
    std::cerr << "warning: fewer than " << o.dims << " positive eigenvalues; extra dimensions are zero\n";
  }
  const fs::path csv = o.out_dir / o.out;
  write_matrix_csv(csv, mds.coordinates, "cluster", "dim");

  Json meta;
  meta["command"] = "mds";
  meta["model"] = o.model.generic_string();
  meta["distance"] = to_string(distance);
  meta["dims"] = o.dims;
  meta["output"] = o.out.generic_string();
  meta["eigenvalues"] = std::vector<double>(mds.eigenvalues.begin(), mds.eigenvalues.end());
  meta["padded"] = mds.padded;
  write_json(fs::path(csv).replace_extension(".json"), meta);
  return kOk;
}

}  // namespace varclust::cli
