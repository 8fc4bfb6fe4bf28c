#include "gdl/sbm.hpp"

#include <algorithm>
#include <cmath>

namespace gdl {

GraphRepr gen_sbm(const std::vector<int>& blocks, double p_intra, double p_inter, std::mt19937_64& rng) {
  if (blocks.empty()) fail(ErrorCode::BadArgument, "SBM needs at least one block");
  if (!(p_intra >= 0.0 && p_intra <= 1.0 && p_inter >= 0.0 && p_inter <= 1.0))
    fail(ErrorCode::BadArgument, "SBM probabilities must lie in [0,1]");
  std::vector<int> block_of;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b] < 1) fail(ErrorCode::BadArgument, "SBM block sizes must be >= 1");
    block_of.insert(block_of.end(), static_cast<std::size_t>(blocks[b]), static_cast<int>(b));
  }
  const auto n = static_cast<Eigen::Index>(block_of.size());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix C = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double p = block_of[static_cast<std::size_t>(i)] == block_of[static_cast<std::size_t>(j)] ? p_intra : p_inter;
      if (u(rng) < p) C(i, j) = C(j, i) = 1.0;
    }
  return make_graph(std::move(C));
}

GraphRepr gen_sbm(const SbmSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  return gen_sbm(spec.blocks, spec.p_intra, spec.p_inter, rng);
}

std::vector<int> equal_blocks(int n, int k) {
  if (k < 1 || n < k) fail(ErrorCode::BadArgument, "cannot split n nodes into k non-empty blocks");
  std::vector<int> out(static_cast<std::size_t>(k), n / k);
  for (int i = 0; i < n % k; ++i) ++out[static_cast<std::size_t>(i)];
  return out;
}

GraphRepr gen_d1_graph(int cls, int order, std::mt19937_64& rng, double p) {
  if (cls < 0 || cls > 2) fail(ErrorCode::BadArgument, "D1 classes are 0, 1 and 2");
  GraphRepr g = gen_sbm(equal_blocks(order, cls + 1), 1.0 - p, p, rng);
  g.label = cls;
  return g;
}

std::vector<int> order_grid(int lo, int hi, int step) {
  if (lo < 1 || hi < lo || step < 1) fail(ErrorCode::BadArgument, "invalid order range");
  std::vector<int> out;
  for (int n = lo; n <= hi; n += step) out.push_back(n);
  return out;
}

std::vector<GraphRepr> make_d1(int per_class, const std::vector<int>& orders, std::uint64_t seed, double p) {
  if (orders.empty()) fail(ErrorCode::BadArgument, "need at least one graph order");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, orders.size() - 1);
  std::vector<GraphRepr> out;
  for (int cls = 0; cls < 3; ++cls)
    for (int i = 0; i < per_class; ++i) out.push_back(gen_d1_graph(cls, orders[pick(rng)], rng, p));
  return out;
}

std::vector<GraphRepr> make_d2(int count, const std::vector<int>& orders, std::uint64_t seed, double p) {
  if (orders.empty()) fail(ErrorCode::BadArgument, "need at least one graph order");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, orders.size() - 1);
  std::uniform_real_distribution<double> frac(0.1, 0.9);
  std::vector<GraphRepr> out;
  for (int i = 0; i < count; ++i) {
    const int n = orders[pick(rng)];
    if (n < 2) fail(ErrorCode::BadArgument, "two-block graphs need order >= 2");
    const int first = std::clamp(static_cast<int>(std::lround(frac(rng) * n)), 1, n - 1);
    out.push_back(gen_sbm({first, n - first}, 1.0 - p, p, rng));
  }
  return out;
}

}  // namespace gdl
