#include "placefm/poi.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace placefm {
namespace {

const char* const kCsvHeader = "id,name,lon,lat,category,state,city,zip";
const char* const kCategorySeparator = " > ";

[[noreturn]] void fail(const std::string& path, std::size_t line_no,
                       const std::string& what) {
  std::ostringstream msg;
  msg << path << ":" << line_no << ": " << what;
  throw std::runtime_error(msg.str());
}

std::vector<std::string> split_csv_row(const std::string& path,
                                       std::size_t line_no,
                                       const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (in_quotes) {
    fail(path, line_no, "unterminated quoted field");
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') {
      out += "\"\"";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

double parse_coordinate(const std::string& path, std::size_t line_no,
                        const std::string& field_name, const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    fail(path, line_no, "field '" + field_name + "': not a number: '" + text + "'");
  }
  return value;
}

std::vector<std::string> split_category(const std::string& text) {
  std::vector<std::string> path;
  std::size_t pos = 0;
  const std::string sep = kCategorySeparator;
  while (true) {
    const std::size_t next = text.find(sep, pos);
    if (next == std::string::npos) {
      path.push_back(text.substr(pos));
      break;
    }
    path.push_back(text.substr(pos, next - pos));
    pos = next + sep.size();
  }
  return path;
}

std::string join_category(const std::vector<std::string>& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) {
      out += kCategorySeparator;
    }
    out += path[i];
  }
  return out;
}

void check_record(const std::string& path, std::size_t line_no, const PoiRecord& r) {
  if (r.id.empty()) {
    fail(path, line_no, "field 'id': must be non-empty");
  }
  if (r.category_path.empty() ||
      std::any_of(r.category_path.begin(), r.category_path.end(),
                  [](const std::string& c) { return c.empty(); })) {
    fail(path, line_no, "field 'category': must have at least one non-empty level");
  }
  if (!r.location.is_valid()) {
    std::ostringstream what;
    what << "coordinates out of range (lon=" << r.location.lon
         << ", lat=" << r.location.lat << ")";
    fail(path, line_no, what.str());
  }
}

std::vector<PoiRecord> load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open file");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": missing header line");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != kCsvHeader) {
    throw std::runtime_error(path + ":1: expected header '" +
                             std::string(kCsvHeader) + "', got '" + line + "'");
  }
  std::vector<PoiRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto fields = split_csv_row(path, line_no, line);
    if (fields.size() != 8) {
      std::ostringstream what;
      what << "expected 8 fields, got " << fields.size();
      fail(path, line_no, what.str());
    }
    PoiRecord r;
    r.id = fields[0];
    r.name = fields[1];
    r.location.lon = parse_coordinate(path, line_no, "lon", fields[2]);
    r.location.lat = parse_coordinate(path, line_no, "lat", fields[3]);
    r.category_path = split_category(fields[4]);
    if (!fields[5].empty()) r.admin["state"] = fields[5];
    if (!fields[6].empty()) r.admin["city"] = fields[6];
    if (!fields[7].empty()) r.admin["zip"] = fields[7];
    check_record(path, line_no, r);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<PoiRecord> load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open file");
  }
  std::vector<PoiRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(path, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) {
      fail(path, line_no, "expected a JSON object");
    }
    PoiRecord r;
    try {
      r.id = obj.at("id").get<std::string>();
      r.name = obj.value("name", std::string());
      r.location.lon = obj.at("lon").get<double>();
      r.location.lat = obj.at("lat").get<double>();
      for (const auto& level : obj.at("category")) {
        r.category_path.push_back(level.get<std::string>());
      }
      for (const char* key : {"state", "city", "zip"}) {
        if (obj.contains(key) && !obj[key].is_null()) {
          const std::string value = obj[key].get<std::string>();
          if (!value.empty()) {
            r.admin[key] = value;
          }
        }
      }
      if (obj.contains("extra")) {
        for (const auto& [key, value] : obj["extra"].items()) {
          r.extra[key] = value.is_string() ? value.get<std::string>() : value.dump();
        }
      }
    } catch (const nlohmann::json::exception& e) {
      fail(path, line_no, std::string("bad field: ") + e.what());
    }
    check_record(path, line_no, r);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace

PoiFormat poi_format_from_path(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    return PoiFormat::csv;
  }
  if (path.size() >= 6 && path.compare(path.size() - 6, 6, ".jsonl") == 0) {
    return PoiFormat::jsonl;
  }
  throw std::runtime_error(path + ": cannot infer format (expected .csv or .jsonl)");
}

std::vector<PoiRecord> load_pois(const std::string& path, PoiFormat format) {
  std::vector<PoiRecord> records =
      format == PoiFormat::csv ? load_csv(path) : load_jsonl(path);
  std::sort(records.begin(), records.end(),
            [](const PoiRecord& a, const PoiRecord& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].id == records[i - 1].id) {
      throw std::runtime_error(path + ": duplicate id '" + records[i].id + "'");
    }
  }
  return records;
}

std::vector<PoiRecord> load_pois(const std::string& path) {
  return load_pois(path, poi_format_from_path(path));
}

void write_pois_csv(const std::vector<PoiRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  out << kCsvHeader << "\n";
  char buf[64];
  for (const PoiRecord& r : records) {
    const auto admin_or_empty = [&r](const char* key) {
      const auto it = r.admin.find(key);
      return it == r.admin.end() ? std::string() : it->second;
    };
    out << csv_escape(r.id) << ',' << csv_escape(r.name) << ',';
    std::snprintf(buf, sizeof(buf), "%.8f,%.8f", r.location.lon, r.location.lat);
    out << buf << ',' << csv_escape(join_category(r.category_path)) << ','
        << csv_escape(admin_or_empty("state")) << ','
        << csv_escape(admin_or_empty("city")) << ','
        << csv_escape(admin_or_empty("zip")) << "\n";
  }
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

void write_pois_jsonl(const std::vector<PoiRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  for (const PoiRecord& r : records) {
    nlohmann::ordered_json obj;
    obj["id"] = r.id;
    obj["name"] = r.name;
    obj["lon"] = r.location.lon;
    obj["lat"] = r.location.lat;
    obj["category"] = r.category_path;
    for (const char* key : {"state", "city", "zip"}) {
      const auto it = r.admin.find(key);
      if (it != r.admin.end()) {
        obj[key] = it->second;
      }
    }
    if (!r.extra.empty()) {
      obj["extra"] = r.extra;
    }
    out << obj.dump() << "\n";
  }
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

std::size_t CategoryVocabulary::dimension() const {
  std::size_t d = 0;
  for (const auto& level : levels) {
    d += level.size();
  }
  return d;
}

std::ptrdiff_t CategoryVocabulary::column_of(std::size_t level,
                                             const std::string& category) const {
  if (level >= levels.size()) {
    return -1;
  }
  const auto& vocab = levels[level];
  const auto it = std::lower_bound(vocab.begin(), vocab.end(), category);
  if (it == vocab.end() || *it != category) {
    return -1;
  }
  return static_cast<std::ptrdiff_t>(level_offsets[level] + (it - vocab.begin()));
}

CategoryVocabulary build_vocabulary(const std::vector<PoiRecord>& records,
                                    std::size_t levels) {
  if (levels < 1) {
    throw std::invalid_argument("build_vocabulary: levels must be >= 1");
  }
  if (records.empty()) {
    throw std::invalid_argument("build_vocabulary: records must be non-empty");
  }
  CategoryVocabulary vocab;
  vocab.levels.resize(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    std::set<std::string> distinct;
    for (const PoiRecord& r : records) {
      if (l < r.category_path.size()) {
        distinct.insert(r.category_path[l]);
      }
    }
    vocab.levels[l].assign(distinct.begin(), distinct.end());
  }
  vocab.level_offsets.resize(levels);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < levels; ++l) {
    vocab.level_offsets[l] = offset;
    offset += vocab.levels[l].size();
  }
  return vocab;
}

std::size_t max_category_depth(const std::vector<PoiRecord>& records) {
  std::size_t depth = 1;
  for (const PoiRecord& r : records) {
    depth = std::max(depth, r.category_path.size());
  }
  return depth;
}

FeatureMatrix encode_features(const std::vector<PoiRecord>& records,
                              const CategoryVocabulary& vocab) {
  FeatureMatrix m = FeatureMatrix::zeros(records.size(), vocab.dimension());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const PoiRecord& r = records[i];
    const std::size_t depth = std::min(r.category_path.size(), vocab.level_count());
    for (std::size_t l = 0; l < depth; ++l) {
      const std::ptrdiff_t col = vocab.column_of(l, r.category_path[l]);
      if (col < 0) {
        throw std::runtime_error("encode_features: record '" + r.id +
                                 "': unknown category '" + r.category_path[l] +
                                 "' at level " + std::to_string(l + 1));
      }
      m.at(i, static_cast<std::size_t>(col)) = 1.0;
    }
  }
  return m;
}

FeatureMatrix concat_aux_features(const FeatureMatrix& base, const FeatureMatrix& aux) {
  if (base.n != aux.n) {
    throw std::invalid_argument(
        "concat_aux_features: row counts differ (" + std::to_string(base.n) +
        " vs " + std::to_string(aux.n) + ")");
  }
  FeatureMatrix out = FeatureMatrix::zeros(base.n, base.d + aux.d);
  for (std::size_t i = 0; i < base.n; ++i) {
    std::copy(base.row(i).begin(), base.row(i).end(), out.row(i).begin());
    std::copy(aux.row(i).begin(), aux.row(i).end(), out.row(i).begin() + base.d);
  }
  return out;
}

std::vector<std::size_t> GranularityLabeling::class_sizes() const {
  std::vector<std::size_t> sizes(classes.size(), 0);
  for (const std::uint32_t c : assignment) {
    ++sizes[c];
  }
  return sizes;
}

GranularityLabeling labeling_for(const std::vector<PoiRecord>& records,
                                 const std::string& granularity_name) {
  GranularityLabeling labeling;
  labeling.granularity_name = granularity_name;
  std::set<std::string> distinct;
  for (const PoiRecord& r : records) {
    const auto it = r.admin.find(granularity_name);
    if (it == r.admin.end()) {
      throw std::runtime_error("labeling_for: record '" + r.id +
                               "' has no '" + granularity_name + "' value");
    }
    distinct.insert(it->second);
  }
  labeling.classes.assign(distinct.begin(), distinct.end());
  labeling.assignment.reserve(records.size());
  for (const PoiRecord& r : records) {
    const auto it = std::lower_bound(labeling.classes.begin(),
                                     labeling.classes.end(),
                                     r.admin.at(granularity_name));
    labeling.assignment.push_back(
        static_cast<std::uint32_t>(it - labeling.classes.begin()));
  }
  return labeling;
}

}  // namespace placefm
