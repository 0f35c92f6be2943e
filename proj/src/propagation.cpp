#include "placefm/propagation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace placefm {

HopWeights HopWeights::uniform(std::size_t hops) {
  return HopWeights{hops, std::vector<double>(hops + 1, 1.0 / static_cast<double>(hops + 1))};
}

void HopWeights::validate() const {
  if (alphas.size() != hops + 1) {
    throw std::invalid_argument("HopWeights: expected " + std::to_string(hops + 1) +
                                " weights, got " + std::to_string(alphas.size()));
  }
  bool any_positive = false;
  for (const double a : alphas) {
    if (!std::isfinite(a) || a < 0.0) {
      throw std::invalid_argument("HopWeights: weights must be finite and >= 0");
    }
    if (a > 0.0) {
      any_positive = true;
    }
  }
  if (!any_positive) {
    throw std::invalid_argument("HopWeights: weights must not all be zero");
  }
}

std::vector<FeatureMatrix> propagate_hops(const NormalizedAdjacency& a_hat,
                                          const FeatureMatrix& x,
                                          std::size_t hops, int threads) {
  if (a_hat.n != x.n) {
    throw std::invalid_argument("propagate_hops: operator is " +
                                std::to_string(a_hat.n) + " nodes but features have " +
                                std::to_string(x.n) + " rows");
  }
  std::vector<FeatureMatrix> result;
  result.reserve(hops + 1);
  result.push_back(x);
  for (std::size_t k = 1; k <= hops; ++k) {
    result.push_back(spmm(a_hat.matrix, result.back(), threads));
  }
  return result;
}

FeatureMatrix fuse_hops(const std::vector<FeatureMatrix>& hops,
                        const HopWeights& weights) {
  weights.validate();
  if (hops.size() != weights.hops + 1) {
    throw std::invalid_argument("fuse_hops: got " + std::to_string(hops.size()) +
                                " hop matrices for " +
                                std::to_string(weights.hops + 1) + " weights");
  }
  const FeatureMatrix& first = hops.front();
  for (const FeatureMatrix& h : hops) {
    if (h.n != first.n || h.d != first.d) {
      throw std::invalid_argument("fuse_hops: hop matrices differ in shape");
    }
  }
  FeatureMatrix out = FeatureMatrix::zeros(first.n, first.d);
  bool first_term = true;
  for (std::size_t k = 0; k < hops.size(); ++k) {
    const double alpha = weights.alphas[k];
    if (alpha == 0.0) {
      continue;
    }
    const double* src = hops[k].values.data();
    double* dst = out.values.data();
    if (first_term) {
      // Assignment keeps alpha = 1 an exact identity.
      for (std::size_t i = 0; i < out.values.size(); ++i) {
        dst[i] = alpha * src[i];
      }
      first_term = false;
    } else {
      for (std::size_t i = 0; i < out.values.size(); ++i) {
        dst[i] += alpha * src[i];
      }
    }
  }
  return out;
}

FeatureMatrix propagate_features(const NormalizedAdjacency& a_hat,
                                 const FeatureMatrix& x,
                                 const HopWeights& weights, int threads) {
  weights.validate();
  return fuse_hops(propagate_hops(a_hat, x, weights.hops, threads), weights);
}

void write_features_csv(const FeatureMatrix& features,
                        std::span<const std::string> node_ids,
                        const std::string& path) {
  if (node_ids.size() != features.n) {
    throw std::invalid_argument("write_features_csv: id count does not match rows");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  out << "id";
  for (std::size_t c = 0; c < features.d; ++c) {
    out << ",f" << c;
  }
  out << "\n";
  char buf[40];
  for (std::size_t i = 0; i < features.n; ++i) {
    out << node_ids[i];
    for (const double v : features.row(i)) {
      std::snprintf(buf, sizeof(buf), "%.12g", v);
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

}  // namespace placefm
