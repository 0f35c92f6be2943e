#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "placefm/knn_graph.hpp"
#include "placefm/poi.hpp"

namespace placefm {

// Weighted multi-hop combination: hop k is scaled by alphas[k], k = 0..hops.
struct HopWeights {
  std::size_t hops = 0;
  std::vector<double> alphas;

  // Uniform 1/(hops+1) per hop.
  static HopWeights uniform(std::size_t hops);
  // Throws unless alphas has hops+1 finite non-negative entries, not all zero.
  void validate() const;
};

// Hop matrices [X, A*X, A^2*X, ..., A^hops*X], computed by repeated
// sparse-dense products (the operator power is never materialized).
std::vector<FeatureMatrix> propagate_hops(const NormalizedAdjacency& a_hat,
                                          const FeatureMatrix& x,
                                          std::size_t hops, int threads = 1);

// Elementwise sum of alphas[k] * hops[k]; all hops must share one shape.
FeatureMatrix fuse_hops(const std::vector<FeatureMatrix>& hops,
                        const HopWeights& weights);

// propagate_hops followed by fuse_hops.
FeatureMatrix propagate_features(const NormalizedAdjacency& a_hat,
                                 const FeatureMatrix& x,
                                 const HopWeights& weights, int threads = 1);

// CSV dump of a feature matrix keyed by node id: header id,f0..f{d-1}.
void write_features_csv(const FeatureMatrix& features,
                        std::span<const std::string> node_ids,
                        const std::string& path);

}  // namespace placefm
