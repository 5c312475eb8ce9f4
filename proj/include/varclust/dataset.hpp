#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "varclust/encoding.hpp"

namespace varclust {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws ValidationError if absent.
  std::size_t column(const std::string& name) const;
};

/// RFC-4180 reader: header row, comma separator, double-quote escaping.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

enum class ColumnKind { numeric, categorical };

struct BlockSpec {
  enum class Metric { standardized, projector };

  std::string name;
  std::vector<std::string> columns;
  Metric metric = Metric::standardized;
};

/**
 * Flat key = value description of a dataset. Recognized keys:
 *
 *   data                   CSV path, relative to the manifest
 *   weights                optional weight column
 *   ignore                 comma list of columns to skip
 *   numeric, categorical   comma lists; `numeric = *` takes every column
 *                          not otherwise declared
 *   block.NAME             comma list of numeric columns forming one block
 *   block.NAME.metric      standardized (default) or projector
 *
 * Any other key is kept in `settings` for the command layer.
 */
struct DatasetManifest {
  std::filesystem::path path;
  std::vector<std::pair<std::string, ColumnKind>> columns;
  std::optional<std::string> weight_column;
  std::vector<std::string> ignore;
  std::vector<BlockSpec> blocks;
  std::map<std::string, std::string> settings;
  bool numeric_rest = false;
};

DatasetManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir = {});
DatasetManifest read_manifest_file(const std::filesystem::path& path);

/// Resolves `numeric = *` and checks every reference against the header.
void resolve_manifest(DatasetManifest& manifest, const CsvTable& table);

struct Dataset {
  Weights weights;
  std::vector<VariableStructure> structures;
};

/**
 * Builds one structure per single column (header order) and one per block
 * (placed at its first column). Numeric cells are parsed as reals,
 * categorical levels numbered by first appearance, weights normalized to
 * unit sum (uniform when no weight column).
 */
Dataset ingest(const DatasetManifest& manifest, const CsvTable& table);

}  // namespace varclust
