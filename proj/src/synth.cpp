#include "placefm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace placefm {
namespace {

// 2 level-1 + 3 level-2 + 5 level-3 distinct labels: one-hot width 10.
const std::vector<std::vector<std::string>> kTaxonomy = {
    {"Dining and Drinking", "Pizzeria", "Wood Fired"},
    {"Dining and Drinking", "Pizzeria", "New York Style"},
    {"Dining and Drinking", "Coffee Shop", "Espresso Bar"},
    {"Travel and Transportation", "Fuel Station", "Diesel"},
    {"Travel and Transportation", "Fuel Station", "Truck Stop"},
};

const char* const kStateNames[] = {
    "AL", "AK", "AZ", "AR", "CA", "CO", "CT", "DE", "FL", "GA", "HI", "ID", "IL",
    "IN", "IA", "KS", "KY", "LA", "ME", "MD", "MA", "MI", "MN", "MS", "MO", "MT",
    "NE", "NV", "NH", "NJ", "NM", "NY", "NC", "ND", "OH", "OK", "OR", "PA", "RI",
    "SC", "SD", "TN", "TX", "UT", "VT", "VA", "WA", "WV", "WI", "WY"};

const char* const kCityBaseNames[] = {"Springfield", "Fairview", "Riverton",
                                      "Franklin",    "Clinton",  "Georgetown",
                                      "Salem",       "Madison",  "Oakland",
                                      "Bristol"};

// Hand-rolled draws so output bytes do not depend on the standard library's
// distribution implementations.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) {
    u1 = uniform01(rng);
  }
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

struct Blob {
  double lon, lat;
  std::size_t state, city;
  std::string zip;
  std::size_t category;
};

}  // namespace

std::vector<PoiRecord> generate_synthetic_pois(const SynthParams& params) {
  if (params.n < 1 || params.states < 1 || params.cities_per_state < 1 ||
      params.blobs_per_city < 1) {
    throw std::invalid_argument("generate_synthetic_pois: all counts must be >= 1");
  }
  if (params.states > std::size(kStateNames)) {
    throw std::invalid_argument("generate_synthetic_pois: at most " +
                                std::to_string(std::size(kStateNames)) + " states");
  }

  std::mt19937_64 rng(params.seed);

  // Disjoint state rectangles on a grid over a continental-scale box.
  const double lon_min = -124.0, lon_max = -70.0;
  const double lat_min = 25.0, lat_max = 49.0;
  const std::size_t grid_cols =
      static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(params.states))));
  const std::size_t grid_rows = (params.states + grid_cols - 1) / grid_cols;
  const double cell_w = (lon_max - lon_min) / static_cast<double>(grid_cols);
  const double cell_h = (lat_max - lat_min) / static_cast<double>(grid_rows);

  std::vector<Blob> blobs;
  std::vector<std::string> city_names;
  std::size_t blob_gid = 0;
  for (std::size_t s = 0; s < params.states; ++s) {
    const double cell_lon = lon_min + static_cast<double>(s % grid_cols) * cell_w;
    const double cell_lat = lat_min + static_cast<double>(s / grid_cols) * cell_h;
    for (std::size_t c = 0; c < params.cities_per_state; ++c) {
      // City anchor inside the inner 70% of the state's rectangle.
      const double anchor_lon = cell_lon + cell_w * (0.15 + 0.7 * uniform01(rng));
      const double anchor_lat = cell_lat + cell_h * (0.15 + 0.7 * uniform01(rng));
      std::string city = std::string(kCityBaseNames[c % std::size(kCityBaseNames)]);
      if (c >= std::size(kCityBaseNames)) {
        city += " " + std::to_string(c / std::size(kCityBaseNames) + 1);
      }
      city += " ";
      city += kStateNames[s];
      city_names.push_back(city);
      for (std::size_t b = 0; b < params.blobs_per_city; ++b, ++blob_gid) {
        Blob blob;
        blob.lon = anchor_lon + 0.12 * (2.0 * uniform01(rng) - 1.0);
        blob.lat = anchor_lat + 0.12 * (2.0 * uniform01(rng) - 1.0);
        blob.state = s;
        blob.city = city_names.size() - 1;
        blob.zip = std::to_string(10000 + blob_gid);
        blob.category = blob_gid % kTaxonomy.size();
        blobs.push_back(std::move(blob));
      }
    }
  }

  const double blob_sigma = 0.008;  // ~0.9 km
  std::vector<PoiRecord> records;
  records.reserve(params.n);
  char id_buf[32];
  for (std::size_t i = 0; i < params.n; ++i) {
    const Blob& blob = blobs[i % blobs.size()];
    PoiRecord r;
    std::snprintf(id_buf, sizeof(id_buf), "p%07zu", i);
    r.id = id_buf;
    r.location.lon =
        std::clamp(blob.lon + blob_sigma * normal(rng), -180.0, 180.0);
    r.location.lat =
        std::clamp(blob.lat + blob_sigma * normal(rng), -90.0, 90.0);
    const bool off_category = uniform01(rng) < 0.30;
    const std::size_t category =
        off_category ? static_cast<std::size_t>(rng() % kTaxonomy.size())
                     : blob.category;
    r.category_path = kTaxonomy[category];
    r.name = r.category_path[1] + " " + std::to_string(i);
    r.admin["state"] = kStateNames[blob.state];
    r.admin["city"] = city_names[blob.city];
    r.admin["zip"] = blob.zip;
    records.push_back(std::move(r));
  }
  // Zero-padded ids make the generation order the dataset order already.
  return records;
}

}  // namespace placefm
