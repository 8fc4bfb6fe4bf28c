#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gdl/core.hpp"

namespace gdl {

struct SbmSpec {
  std::vector<int> blocks;
  double p_intra = 0.9;
  double p_inter = 0.1;
  std::uint64_t seed = 0;
};

/// 0/1 symmetric adjacency with zero diagonal and uniform node weights.
GraphRepr gen_sbm(const SbmSpec& spec);

/// Same, drawing from a caller-owned generator.
GraphRepr gen_sbm(const std::vector<int>& blocks, double p_intra, double p_inter, std::mt19937_64& rng);

/// n nodes split into k blocks as evenly as possible.
std::vector<int> equal_blocks(int n, int k);

/// Graph of class 0 (one dense block), 1 (two clusters) or 2 (three clusters).
GraphRepr gen_d1_graph(int cls, int order, std::mt19937_64& rng, double p = 0.1);

/// Orders are drawn uniformly from `orders`. Labels are the class index.
std::vector<GraphRepr> make_d1(int per_class, const std::vector<int>& orders, std::uint64_t seed, double p = 0.1);

/// Two clusters whose first-block fraction is uniform on [0.1, 0.9].
std::vector<GraphRepr> make_d2(int count, const std::vector<int>& orders, std::uint64_t seed, double p = 0.1);

/// {lo, lo + step, ..., hi}.
std::vector<int> order_grid(int lo, int hi, int step = 5);

}  // namespace gdl
