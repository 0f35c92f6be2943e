#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "placefm/geo.hpp"

namespace placefm {

// One point of interest. `category_path` is the hierarchical category
// ("Dining and Drinking > Pizzeria" parses to two levels). `admin` maps a
// granularity name ("state", "city", "zip") to that record's class value.
struct PoiRecord {
  std::string id;
  std::string name;
  GeoPoint location;
  std::vector<std::string> category_path;
  std::map<std::string, std::string> admin;
  std::map<std::string, std::string> extra;
};

enum class PoiFormat { csv, jsonl };

// Infers csv/jsonl from the file extension; throws for anything else.
PoiFormat poi_format_from_path(const std::string& path);

// Loads records sorted by ascending id. Malformed rows and duplicate ids are
// reported with line numbers / offending values. CSV schema (header required):
//   id,name,lon,lat,category,state,city,zip
// with " > " separating category levels. JSONL carries the same field names,
// `category` as a string array, plus an optional `extra` object.
std::vector<PoiRecord> load_pois(const std::string& path, PoiFormat format);
std::vector<PoiRecord> load_pois(const std::string& path);

void write_pois_csv(const std::vector<PoiRecord>& records, const std::string& path);
void write_pois_jsonl(const std::vector<PoiRecord>& records, const std::string& path);

// Dense row-major n x d matrix. Row i always refers to node i of the dataset
// ordering (ascending record id).
struct FeatureMatrix {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> values;

  static FeatureMatrix zeros(std::size_t n, std::size_t d) {
    return FeatureMatrix{n, d, std::vector<double>(n * d, 0.0)};
  }
  double& at(std::size_t i, std::size_t j) { return values[i * d + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * d + j]; }
  std::span<double> row(std::size_t i) { return {values.data() + i * d, d}; }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * d, d};
  }
};

// Per-level sorted category vocabularies; the one-hot encoding concatenates
// the levels, so d = sum of level sizes.
struct CategoryVocabulary {
  std::vector<std::vector<std::string>> levels;
  std::vector<std::size_t> level_offsets;

  std::size_t level_count() const { return levels.size(); }
  std::size_t dimension() const;
  // Column of `category` at `level`, or -1 if unknown.
  std::ptrdiff_t column_of(std::size_t level, const std::string& category) const;
};

CategoryVocabulary build_vocabulary(const std::vector<PoiRecord>& records,
                                    std::size_t levels);

// Deepest category path in the dataset (at least 1).
std::size_t max_category_depth(const std::vector<PoiRecord>& records);

// One-hot rows in vocabulary column order; a record missing deeper levels
// leaves those columns zero. Unknown categories are an error naming the
// record and the string.
FeatureMatrix encode_features(const std::vector<PoiRecord>& records,
                              const CategoryVocabulary& vocab);

// Column-wise concatenation [base | aux]; row counts must match.
FeatureMatrix concat_aux_features(const FeatureMatrix& base,
                                  const FeatureMatrix& aux);

// Assignment of every node to one of the distinct admin values observed for
// one granularity. Classes are sorted, so class indices are stable.
struct GranularityLabeling {
  std::string granularity_name;
  std::vector<std::string> classes;
  std::vector<std::uint32_t> assignment;  // per node, index into classes

  std::size_t class_count() const { return classes.size(); }
  std::vector<std::size_t> class_sizes() const;
};

GranularityLabeling labeling_for(const std::vector<PoiRecord>& records,
                                 const std::string& granularity_name);

}  // namespace placefm
