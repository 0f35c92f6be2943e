#include "placefm/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace placefm {
namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
constexpr std::uint32_t kLeafSize = 16;

double haversine_unchecked(double lon1, double lat1, double lon2, double lat2) {
  // Absolute differences keep the formula bitwise symmetric in its arguments.
  const double dphi = std::fabs(lat2 - lat1) * kDegToRad;
  const double dlam = std::fabs(lon2 - lon1) * kDegToRad;
  const double sp = std::sin(0.5 * dphi);
  const double sl = std::sin(0.5 * dlam);
  const double h = sp * sp + std::cos(lat1 * kDegToRad) * std::cos(lat2 * kDegToRad) * sl * sl;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

void to_unit_sphere(const GeoPoint& p, double out[3]) {
  const double phi = p.lat * kDegToRad;
  const double lam = p.lon * kDegToRad;
  out[0] = std::cos(phi) * std::cos(lam);
  out[1] = std::cos(phi) * std::sin(lam);
  out[2] = std::sin(phi);
}

}  // namespace

bool GeoPoint::is_valid() const {
  return std::isfinite(lon) && std::isfinite(lat) && lon >= -180.0 &&
         lon <= 180.0 && lat >= -90.0 && lat <= 90.0;
}

void GeoPoint::validate(const char* context) const {
  if (!is_valid()) {
    std::ostringstream msg;
    msg << context << ": invalid coordinate (lon=" << lon << ", lat=" << lat << ")";
    throw std::invalid_argument(msg.str());
  }
}

double haversine_m(const GeoPoint& a, const GeoPoint& b) {
  a.validate("haversine_m");
  b.validate("haversine_m");
  return haversine_unchecked(a.lon, a.lat, b.lon, b.lat);
}

SpatialIndex::SpatialIndex(std::span<const GeoPoint> points) {
  const std::size_t n = points.size();
  lons_.resize(n);
  lats_.resize(n);
  xs_.resize(n);
  ys_.resize(n);
  zs_.resize(n);
  order_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    points[i].validate("SpatialIndex");
    lons_[i] = points[i].lon;
    lats_[i] = points[i].lat;
    double xyz[3];
    to_unit_sphere(points[i], xyz);
    xs_[i] = xyz[0];
    ys_[i] = xyz[1];
    zs_[i] = xyz[2];
    order_[i] = static_cast<std::uint32_t>(i);
  }
  if (n > 0) {
    nodes_.reserve(2 * n / kLeafSize + 2);
    root_ = build_node(0, static_cast<std::uint32_t>(n));
  }
}

std::int32_t SpatialIndex::build_node(std::uint32_t begin, std::uint32_t end) {
  KdNode node;
  node.begin = begin;
  node.end = end;
  const double* coords[3] = {xs_.data(), ys_.data(), zs_.data()};
  for (int a = 0; a < 3; ++a) {
    node.bb_min[a] = coords[a][order_[begin]];
    node.bb_max[a] = node.bb_min[a];
  }
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    for (int a = 0; a < 3; ++a) {
      const double v = coords[a][order_[i]];
      node.bb_min[a] = std::min(node.bb_min[a], v);
      node.bb_max[a] = std::max(node.bb_max[a], v);
    }
  }

  if (end - begin > kLeafSize) {
    int axis = 0;
    double widest = -1.0;
    for (int a = 0; a < 3; ++a) {
      const double extent = node.bb_max[a] - node.bb_min[a];
      if (extent > widest) {
        widest = extent;
        axis = a;
      }
    }
    const double* axis_coords = coords[axis];
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid,
                     order_.begin() + end,
                     [axis_coords](std::uint32_t a, std::uint32_t b) {
                       const double ca = axis_coords[a];
                       const double cb = axis_coords[b];
                       return ca < cb || (ca == cb && a < b);
                     });
    const std::int32_t self = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(node);
    const std::int32_t left = build_node(begin, mid);
    const std::int32_t right = build_node(mid, end);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
  }

  const std::int32_t self = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  return self;
}

double SpatialIndex::min_possible_distance_m(const KdNode& node,
                                             const double q[3]) const {
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    double diff = 0.0;
    if (q[a] < node.bb_min[a]) {
      diff = node.bb_min[a] - q[a];
    } else if (q[a] > node.bb_max[a]) {
      diff = q[a] - node.bb_max[a];
    }
    d2 += diff * diff;
  }
  const double chord = std::min(2.0, std::sqrt(d2));
  const double theta = 2.0 * std::asin(0.5 * chord);
  // Slightly deflated so floating-point error in the chord geometry can never
  // prune a point whose true distance equals the current bound.
  return kEarthRadiusM * theta * (1.0 - 1e-12) - 1e-6;
}

template <typename Visit>
void SpatialIndex::search(std::int32_t node_idx, const double q[3],
                          const Visit& visit) const {
  const KdNode& node = nodes_[node_idx];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      visit.candidate(order_[i]);
    }
    return;
  }
  const double lb_left = min_possible_distance_m(nodes_[node.left], q);
  const double lb_right = min_possible_distance_m(nodes_[node.right], q);
  const std::int32_t first = lb_left <= lb_right ? node.left : node.right;
  const std::int32_t second = lb_left <= lb_right ? node.right : node.left;
  const double lb_first = std::min(lb_left, lb_right);
  const double lb_second = std::max(lb_left, lb_right);
  if (lb_first <= visit.bound()) {
    search(first, q, visit);
  }
  if (lb_second <= visit.bound()) {
    search(second, q, visit);
  }
}

std::optional<IndexMatch> SpatialIndex::nearest_within(const GeoPoint& query,
                                                       double radius_m) const {
  query.validate("nearest_within");
  if (!(radius_m > 0.0)) {
    throw std::invalid_argument("nearest_within: radius_m must be > 0");
  }
  if (empty()) {
    return std::nullopt;
  }
  double q[3];
  to_unit_sphere(query, q);

  struct Visitor {
    const SpatialIndex* self;
    const GeoPoint* query;
    double radius;
    mutable bool found = false;
    mutable double best_dist = 0.0;
    mutable std::size_t best_id = 0;

    double bound() const { return found ? std::min(best_dist, radius) : radius; }
    void candidate(std::size_t id) const {
      const double d = haversine_unchecked(query->lon, query->lat,
                                           self->lons_[id], self->lats_[id]);
      if (d > radius) {
        return;
      }
      if (!found || d < best_dist || (d == best_dist && id < best_id)) {
        found = true;
        best_dist = d;
        best_id = id;
      }
    }
  } visitor{this, &query, radius_m};

  search(root_, q, visitor);
  if (!visitor.found) {
    return std::nullopt;
  }
  return IndexMatch{visitor.best_id, visitor.best_dist};
}

std::vector<IndexMatch> SpatialIndex::k_nearest(
    const GeoPoint& query, std::size_t k,
    std::optional<std::size_t> exclude) const {
  query.validate("k_nearest");
  if (k < 1) {
    throw std::invalid_argument("k_nearest: k must be >= 1");
  }
  if (empty()) {
    return {};
  }
  double q[3];
  to_unit_sphere(query, q);

  using Entry = std::pair<double, std::size_t>;  // (distance, id); max-heap
  struct Visitor {
    const SpatialIndex* self;
    const GeoPoint* query;
    std::size_t k;
    std::optional<std::size_t> exclude;
    mutable std::priority_queue<Entry> heap{};

    double bound() const {
      return heap.size() < k ? std::numeric_limits<double>::infinity()
                             : heap.top().first;
    }
    void candidate(std::size_t id) const {
      if (exclude && *exclude == id) {
        return;
      }
      const double d = haversine_unchecked(query->lon, query->lat,
                                           self->lons_[id], self->lats_[id]);
      if (heap.size() < k) {
        heap.emplace(d, id);
      } else if (Entry{d, id} < heap.top()) {
        heap.pop();
        heap.emplace(d, id);
      }
    }
  } visitor{this, &query, k, exclude};

  search(root_, q, visitor);

  std::vector<IndexMatch> result(visitor.heap.size());
  for (std::size_t i = visitor.heap.size(); i-- > 0;) {
    result[i] = IndexMatch{visitor.heap.top().second, visitor.heap.top().first};
    visitor.heap.pop();
  }
  return result;
}

}  // namespace placefm
