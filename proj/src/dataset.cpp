#include "varclust/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "varclust/errors.hpp"

namespace varclust {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool is_missing(const std::string& cell) {
  const std::string t = trim(cell);
  return t.empty() || t == "NA" || t == "NaN" || t == "nan";
}

std::optional<double> parse_real(const std::string& cell) {
  const std::string t = trim(cell);
  double v = 0.0;
  const char* first = t.data();
  if (!t.empty() && t.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string cell_ref(std::size_t row, const std::string& col) {
  // Row numbers count the header as line 1.
  return "row " + std::to_string(row + 2) + ", column '" + col + "'";
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ValidationError("unknown column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  char c = 0;
  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record.front().empty())) records.push_back(record);
    record.clear();
  };
  // Skip a UTF-8 byte order mark.
  if (in.peek() == 0xEF) {
    char bom[3];
    in.read(bom, 3);
  }
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get(c);
      end_record();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw ValidationError("unterminated quoted field in CSV");
  if (field_started || !field.empty() || !record.empty()) end_record();
  if (records.empty()) throw ValidationError("CSV has no header row");

  CsvTable table;
  table.header = records.front();
  for (auto& h : table.header) h = trim(h);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw ValidationError("CSV line " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                            " fields, expected " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return read_csv(in);
}

DatasetManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
  DatasetManifest m;
  std::map<std::string, BlockSpec> blocks;
  std::vector<std::string> block_order;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("manifest line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "data") {
      m.path = base_dir / value;
    } else if (key == "weights") {
      m.weight_column = value;
    } else if (key == "ignore") {
      for (auto& c : split_list(value)) m.ignore.push_back(c);
    } else if (key == "numeric" || key == "categorical") {
      const ColumnKind kind = key == "numeric" ? ColumnKind::numeric : ColumnKind::categorical;
      for (auto& c : split_list(value)) {
        if (c == "*" && kind == ColumnKind::numeric) {
          m.numeric_rest = true;
        } else {
          m.columns.emplace_back(c, kind);
        }
      }
    } else if (key.rfind("block.", 0) == 0) {
      std::string rest = key.substr(6);
      const bool is_metric = rest.size() > 7 && rest.compare(rest.size() - 7, 7, ".metric") == 0;
      if (is_metric) rest.erase(rest.size() - 7);
      if (rest.empty()) throw ValidationError("manifest line " + std::to_string(lineno) + ": block needs a name");
      if (!blocks.count(rest)) block_order.push_back(rest);
      BlockSpec& b = blocks[rest];
      b.name = rest;
      if (is_metric) {
        if (value == "standardized") {
          b.metric = BlockSpec::Metric::standardized;
        } else if (value == "projector") {
          b.metric = BlockSpec::Metric::projector;
        } else {
          throw ValidationError("block '" + rest + "': metric must be standardized or projector");
        }
      } else {
        b.columns = split_list(value);
      }
    } else {
      m.settings[key] = value;
    }
  }
  for (const auto& name : block_order) {
    if (blocks[name].columns.empty()) throw ValidationError("block '" + name + "' lists no columns");
    m.blocks.push_back(blocks[name]);
  }
  return m;
}

DatasetManifest read_manifest_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest '" + path.string() + "'");
  return parse_manifest(in, path.parent_path());
}

void resolve_manifest(DatasetManifest& m, const CsvTable& table) {
  std::set<std::string> used;
  auto claim = [&](const std::string& c, const std::string& what) {
    table.column(c);
    if (!used.insert(c).second) throw ValidationError("column '" + c + "' is declared twice (" + what + ")");
  };
  for (const auto& c : m.ignore) claim(c, "ignore");
  if (m.weight_column) claim(*m.weight_column, "weights");
  for (const auto& [c, kind] : m.columns) claim(c, "column");
  for (const auto& b : m.blocks) {
    for (const auto& c : b.columns) {
      claim(c, "block " + b.name);
      const auto it = std::find_if(m.columns.begin(), m.columns.end(), [&](const auto& p) { return p.first == c; });
      if (it != m.columns.end()) throw ValidationError("column '" + c + "' is both a variable and in a block");
    }
  }
  if (m.numeric_rest) {
    for (const auto& h : table.header) {
      if (!used.count(h)) {
        m.columns.emplace_back(h, ColumnKind::numeric);
        used.insert(h);
      }
    }
    m.numeric_rest = false;
  }
  if (m.columns.empty() && m.blocks.empty()) throw ValidationError("manifest declares no variables");
}

Dataset ingest(const DatasetManifest& manifest, const CsvTable& table) {
  DatasetManifest m = manifest;
  resolve_manifest(m, table);
  const std::size_t n = table.rows.size();
  if (n < 2) throw ValidationError("dataset needs at least two rows");

  auto numeric_column = [&](const std::string& name) {
    const std::size_t j = table.column(name);
    Vector v(static_cast<Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const std::string& cell = table.rows[i][j];
      if (is_missing(cell)) throw ValidationError("missing value at " + cell_ref(i, name));
      const auto x = parse_real(cell);
      if (!x) throw ValidationError("unparseable number '" + trim(cell) + "' at " + cell_ref(i, name));
      v[static_cast<Index>(i)] = *x;
    }
    return v;
  };

  Vector raw = Vector::Ones(static_cast<Index>(n));
  if (m.weight_column) {
    raw = numeric_column(*m.weight_column);
    if (raw.minCoeff() <= 0.0) throw ValidationError("weights must be positive");
  }
  Dataset ds{Weights::normalized(raw), {}};
  const Weights& w = ds.weights;

  // Position of each structure in header order.
  std::vector<std::pair<std::size_t, VariableStructure>> placed;
  for (const auto& [name, kind] : m.columns) {
    const std::size_t j = table.column(name);
    if (kind == ColumnKind::numeric) {
      placed.emplace_back(j, encode_numeric(numeric_column(name), w, name));
    } else {
      std::unordered_map<std::string, int> ids;
      std::vector<int> labels(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::string& cell = table.rows[i][j];
        if (is_missing(cell)) throw ValidationError("missing value at " + cell_ref(i, name));
        const auto it = ids.emplace(trim(cell), static_cast<int>(ids.size())).first;
        labels[i] = it->second;
      }
      placed.emplace_back(j, encode_categorical(labels, w, name));
    }
  }
  for (const auto& b : m.blocks) {
    Matrix x(static_cast<Index>(n), static_cast<Index>(b.columns.size()));
    std::size_t first = table.header.size();
    for (std::size_t c = 0; c < b.columns.size(); ++c) {
      x.col(static_cast<Index>(c)) = numeric_column(b.columns[c]);
      first = std::min(first, table.column(b.columns[c]));
    }
    const Matrix xc = center_columns(x, w);
    const Matrix cov = xc.transpose() * w.values().asDiagonal() * xc;
    Matrix metric;
    if (b.metric == BlockSpec::Metric::projector) {
      Eigen::LDLT<Matrix> ldlt(cov);
      if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 1e-12 * cov.diagonal().maxCoeff()) {
        throw ValidationError("block '" + b.name + "' is rank-deficient; the projector metric needs full column rank");
      }
      metric = ldlt.solve(Matrix::Identity(cov.rows(), cov.cols()));
    } else {
      Vector d = cov.diagonal();
      for (Index c = 0; c < d.size(); ++c) {
        if (!(d[c] > 0.0)) throw ValidationError("block '" + b.name + "' has a zero-variance column");
      }
      metric = d.cwiseInverse().asDiagonal();
    }
    placed.emplace_back(first, encode_block(x, metric, w, b.name));
  }
  std::stable_sort(placed.begin(), placed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [pos, vs] : placed) ds.structures.push_back(std::move(vs));
  return ds;
}

}  // namespace varclust
