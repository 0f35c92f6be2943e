#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace placefm {

// Mean Earth radius, meters.
inline constexpr double kEarthRadiusM = 6'371'000.0;

struct GeoPoint {
  double lon = 0.0;  // degrees, [-180, 180]
  double lat = 0.0;  // degrees, [-90, 90]

  bool is_valid() const;
  // Throws std::invalid_argument naming `context` on violation.
  void validate(const char* context) const;
};

// Great-circle distance in meters on the mean-radius sphere.
// Symmetric by construction; throws on non-finite or out-of-range input.
double haversine_m(const GeoPoint& a, const GeoPoint& b);

struct IndexMatch {
  std::size_t id = 0;  // caller-side record id (position in the input span)
  double distance_m = 0.0;
};

// Static nearest-neighbor index over points on the sphere. Entry ids are the
// positions in the input span; callers that need a different id ordering
// (e.g. string ids) arrange the input accordingly.
//
// All distance comparisons use haversine_m with ties broken by ascending id,
// so results match a linear scan using the same rule exactly. Internally a
// kd-tree over unit-sphere 3D coordinates prunes candidates; the chord-length
// bound is monotone in great-circle distance, so pruning is exact.
//
// Immutable after construction; concurrent queries are safe.
class SpatialIndex {
 public:
  SpatialIndex() = default;
  explicit SpatialIndex(std::span<const GeoPoint> points);

  std::size_t size() const { return lons_.size(); }
  bool empty() const { return lons_.empty(); }

  // Closest entry with distance <= radius_m, ties by smallest id.
  // radius_m must be > 0. Empty result when nothing qualifies.
  std::optional<IndexMatch> nearest_within(const GeoPoint& query,
                                           double radius_m) const;

  // The k closest entries (fewer if the index is smaller), sorted by
  // (distance, id) ascending. `exclude` drops one id from consideration.
  std::vector<IndexMatch> k_nearest(
      const GeoPoint& query, std::size_t k,
      std::optional<std::size_t> exclude = std::nullopt) const;

 private:
  struct KdNode {
    double bb_min[3];
    double bb_max[3];
    std::uint32_t begin = 0;  // range into order_
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build_node(std::uint32_t begin, std::uint32_t end);
  double min_possible_distance_m(const KdNode& node, const double q[3]) const;

  template <typename Visit>
  void search(std::int32_t node_idx, const double q[3], const Visit& visit) const;

  std::vector<double> lons_, lats_;
  std::vector<double> xs_, ys_, zs_;       // unit-sphere coordinates
  std::vector<std::uint32_t> order_;       // permutation grouped by kd leaves
  std::vector<KdNode> nodes_;
  std::int32_t root_ = -1;
};

}  // namespace placefm
