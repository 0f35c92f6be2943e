#include "placefm/fusion.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "placefm/parallel.hpp"

namespace placefm {

std::vector<std::string> name_tokens(std::string_view name) {
  std::vector<std::string> tokens;
  std::string cur;
  for (const char ch : name) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (std::isspace(c)) {
      if (!cur.empty()) {
        tokens.push_back(std::move(cur));
        cur.clear();
      }
    }
    // Other punctuation is dropped without breaking the token,
    // so "Joe's" normalizes to "joes".
  }
  if (!cur.empty()) {
    tokens.push_back(std::move(cur));
  }
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

double name_similarity(std::string_view a, std::string_view b) {
  const auto ta = name_tokens(a);
  const auto tb = name_tokens(b);
  if (ta.empty() && tb.empty()) {
    return 1.0;
  }
  if (ta.empty() || tb.empty()) {
    return 0.0;
  }
  std::size_t intersection = 0;
  std::size_t i = 0, j = 0;
  while (i < ta.size() && j < tb.size()) {
    if (ta[i] == tb[j]) {
      ++intersection;
      ++i;
      ++j;
    } else if (ta[i] < tb[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::size_t uni = ta.size() + tb.size() - intersection;
  return static_cast<double>(intersection) / static_cast<double>(uni);
}

PoiRecord merge_attributes(const PoiRecord& primary, const PoiRecord& secondary) {
  PoiRecord merged;
  merged.id = primary.id;
  merged.name = primary.name;
  merged.location = primary.location;
  merged.category_path = primary.category_path;
  merged.admin = primary.admin;
  merged.extra = secondary.extra;
  for (const auto& [key, value] : primary.extra) {
    merged.extra[key] = value;  // primary wins collisions
  }
  merged.extra["osm_name"] = secondary.name;
  merged.extra["osm_id"] = secondary.id;
  return merged;
}

std::vector<FusedRecord> spatial_join(const std::vector<PoiRecord>& primary,
                                      const std::vector<PoiRecord>& secondary,
                                      double radius_m, double min_similarity,
                                      int threads) {
  if (!(radius_m > 0.0)) {
    throw std::invalid_argument("spatial_join: radius_m must be > 0");
  }
  if (min_similarity < 0.0 || min_similarity > 1.0) {
    throw std::invalid_argument("spatial_join: min_similarity must be in [0,1]");
  }

  // Index positions follow ascending secondary id, so the index's
  // smallest-id tie rule matches the record ids regardless of input order.
  std::vector<std::size_t> by_id(secondary.size());
  std::iota(by_id.begin(), by_id.end(), 0);
  std::sort(by_id.begin(), by_id.end(), [&secondary](std::size_t a, std::size_t b) {
    return secondary[a].id < secondary[b].id;
  });
  std::vector<GeoPoint> points(secondary.size());
  for (std::size_t i = 0; i < by_id.size(); ++i) {
    points[i] = secondary[by_id[i]].location;
  }
  const SpatialIndex index{points};

  std::vector<std::optional<FusedRecord>> slots(primary.size());
  parallel_for(0, primary.size(), threads, [&](std::size_t i) {
    const PoiRecord& p = primary[i];
    const auto match = index.nearest_within(p.location, radius_m);
    if (!match) {
      return;
    }
    const PoiRecord& s = secondary[by_id[match->id]];
    const double similarity = name_similarity(p.name, s.name);
    if (!(similarity > min_similarity)) {
      return;
    }
    slots[i] = FusedRecord{p.id, s.id, match->distance_m, similarity,
                           merge_attributes(p, s)};
  });

  std::vector<FusedRecord> fused;
  for (auto& slot : slots) {
    if (slot) {
      fused.push_back(std::move(*slot));
    }
  }
  return fused;
}

namespace {

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

std::string join_category(const std::vector<std::string>& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) {
      out += " > ";
    }
    out += path[i];
  }
  return out;
}

}  // namespace

void write_fused_csv(const std::vector<FusedRecord>& fused, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  out << "id,name,lon,lat,category,state,city,zip,"
         "osm_id,osm_name,match_distance_m,name_similarity\n";
  char buf[96];
  for (const FusedRecord& f : fused) {
    const PoiRecord& r = f.merged;
    const auto admin_or_empty = [&r](const char* key) {
      const auto it = r.admin.find(key);
      return it == r.admin.end() ? std::string() : it->second;
    };
    out << csv_escape(r.id) << ',' << csv_escape(r.name) << ',';
    std::snprintf(buf, sizeof(buf), "%.8f,%.8f", r.location.lon, r.location.lat);
    out << buf << ',' << csv_escape(join_category(r.category_path)) << ','
        << csv_escape(admin_or_empty("state")) << ','
        << csv_escape(admin_or_empty("city")) << ','
        << csv_escape(admin_or_empty("zip")) << ','
        << csv_escape(f.secondary_id) << ','
        << csv_escape(r.extra.at("osm_name")) << ',';
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", f.distance_m, f.name_similarity);
    out << buf << "\n";
  }
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

void write_fused_jsonl(const std::vector<FusedRecord>& fused, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  for (const FusedRecord& f : fused) {
    const PoiRecord& r = f.merged;
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
    obj["osm_id"] = f.secondary_id;
    obj["osm_name"] = r.extra.at("osm_name");
    obj["match_distance_m"] = f.distance_m;
    obj["name_similarity"] = f.name_similarity;
    if (!r.extra.empty()) {
      obj["extra"] = r.extra;
    }
    out << obj.dump() << "\n";
  }
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

}  // namespace placefm
