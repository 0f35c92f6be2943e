#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "placefm/geo.hpp"
#include "placefm/poi.hpp"

namespace test_support {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline double normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) {
    u1 = uniform01(rng);
  }
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * uniform01(rng));
}

inline std::vector<placefm::GeoPoint> random_points(std::size_t n, std::mt19937_64& rng,
                                                    double lon_lo = -10.0,
                                                    double lon_hi = 10.0,
                                                    double lat_lo = -10.0,
                                                    double lat_hi = 10.0) {
  std::vector<placefm::GeoPoint> points(n);
  for (auto& p : points) {
    p.lon = uniform(rng, lon_lo, lon_hi);
    p.lat = uniform(rng, lat_lo, lat_hi);
  }
  return points;
}

// Linear-scan oracles ordered by (haversine distance, id), mirroring the
// index contract without sharing any of its code.
inline std::vector<placefm::IndexMatch> brute_force_k_nearest(
    const std::vector<placefm::GeoPoint>& points, const placefm::GeoPoint& query,
    std::size_t k, std::optional<std::size_t> exclude = std::nullopt) {
  std::vector<placefm::IndexMatch> all;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (exclude && *exclude == i) {
      continue;
    }
    all.push_back({i, placefm::haversine_m(query, points[i])});
  }
  std::sort(all.begin(), all.end(),
            [](const placefm::IndexMatch& a, const placefm::IndexMatch& b) {
              return a.distance_m < b.distance_m ||
                     (a.distance_m == b.distance_m && a.id < b.id);
            });
  if (all.size() > k) {
    all.resize(k);
  }
  return all;
}

inline std::optional<placefm::IndexMatch> brute_force_nearest_within(
    const std::vector<placefm::GeoPoint>& points, const placefm::GeoPoint& query,
    double radius_m) {
  std::optional<placefm::IndexMatch> best;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = placefm::haversine_m(query, points[i]);
    if (d > radius_m) {
      continue;
    }
    if (!best || d < best->distance_m || (d == best->distance_m && i < best->id)) {
      best = placefm::IndexMatch{i, d};
    }
  }
  return best;
}

inline double sqdist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

// Exhaustive k-means oracle: the optimal WCSS over every assignment of n
// points to at most M groups, each non-empty group scored against its mean.
// Only usable for tiny instances (M^n enumerable).
inline double exhaustive_optimal_wcss(const placefm::FeatureMatrix& points,
                                      std::size_t M) {
  const std::size_t n = points.n;
  const std::size_t d = points.d;
  std::size_t combos = 1;
  for (std::size_t i = 0; i < n; ++i) {
    combos *= M;
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> assign(n);
  std::vector<double> sums(M * d);
  std::vector<std::size_t> counts(M);
  for (std::size_t code = 0; code < combos; ++code) {
    std::size_t rest = code;
    for (std::size_t i = 0; i < n; ++i) {
      assign[i] = rest % M;
      rest /= M;
    }
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assign[i]];
      for (std::size_t c = 0; c < d; ++c) {
        sums[assign[i] * d + c] += points.at(i, c);
      }
    }
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t g = assign[i];
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = points.at(i, c) - sums[g * d + c] / counts[g];
        wcss += diff * diff;
      }
    }
    best = std::min(best, wcss);
  }
  return best;
}

// Gaussian feature blobs with known membership.
struct BlobData {
  placefm::FeatureMatrix points;
  std::vector<std::size_t> blob_of;  // ground truth per row
};

inline BlobData make_blobs(const std::vector<std::vector<double>>& centers,
                           std::size_t points_per_blob, double sigma,
                           std::mt19937_64& rng) {
  const std::size_t d = centers.front().size();
  BlobData data;
  data.points = placefm::FeatureMatrix::zeros(centers.size() * points_per_blob, d);
  std::size_t row = 0;
  for (std::size_t b = 0; b < centers.size(); ++b) {
    for (std::size_t p = 0; p < points_per_blob; ++p, ++row) {
      for (std::size_t c = 0; c < d; ++c) {
        data.points.at(row, c) = centers[b][c] + sigma * normal(rng);
      }
      data.blob_of.push_back(b);
    }
  }
  return data;
}

// Unique scratch directory under the system temp dir; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<std::uint64_t> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("placefm_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace test_support
