#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "placefm/poi.hpp"

namespace placefm {

inline constexpr double kDefaultJoinRadiusM = 111.0;
inline constexpr double kDefaultMinNameSimilarity = 0.5;

// Normalized token set of a name: lowercase, punctuation removed inside
// tokens, split on whitespace, empties dropped, duplicates collapsed.
std::vector<std::string> name_tokens(std::string_view name);

// Jaccard similarity of the two normalized token sets, in [0, 1].
// Two empty sets compare equal (1.0); exactly one empty gives 0.0.
double name_similarity(std::string_view a, std::string_view b);

// One primary record joined to its nearest in-radius secondary record.
struct FusedRecord {
  std::string primary_id;
  std::string secondary_id;
  double distance_m = 0.0;
  double name_similarity = 0.0;
  PoiRecord merged;
};

// Attribute union: identity fields (id, name, location, categories, admin)
// come from the primary record, extras from both with the primary winning key
// collisions. The secondary's name and id land under "osm_name" / "osm_id".
PoiRecord merge_attributes(const PoiRecord& primary, const PoiRecord& secondary);

// For every primary record, finds the nearest secondary record within
// radius_m and keeps the pair only when the name similarity strictly exceeds
// min_similarity. Unmatched primaries are dropped. Output preserves primary
// order; equidistant secondaries resolve to the smaller id, so the result is
// independent of the secondary list's ordering.
std::vector<FusedRecord> spatial_join(const std::vector<PoiRecord>& primary,
                                      const std::vector<PoiRecord>& secondary,
                                      double radius_m = kDefaultJoinRadiusM,
                                      double min_similarity = kDefaultMinNameSimilarity,
                                      int threads = 1);

// Fused output: the POI schema extended with
// osm_id, osm_name, match_distance_m, name_similarity.
void write_fused_csv(const std::vector<FusedRecord>& fused, const std::string& path);
void write_fused_jsonl(const std::vector<FusedRecord>& fused, const std::string& path);

}  // namespace placefm
