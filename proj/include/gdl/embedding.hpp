#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gdl/unmixing.hpp"

namespace gdl {

/// M_pq = <D_h C_p, C_q D_h>; with feature atoms the result is
/// alpha M1 + (1 - alpha) M2 where M2_pq = <D_h^{1/2} A_p, D_h^{1/2} A_q>.
Matrix mahalanobis_matrix(const Dictionary& d, const Histogram& h);

double embedding_distance(const Matrix& M, const Vector& w1, const Vector& w2);

enum class DistanceMode { Mahalanobis, GwEmbedded, GwInput };

struct PairwiseOptions {
  bool squared = false;  // report GW^2 / squared Mahalanobis instead of the square root
  std::optional<Histogram> h;  // node weights for the metric; uniform over N by default
  GwOptions gw;  // used by the gw_input mode
};

/// Symmetric matrix of distances between embedded graphs. gw_embedded solves
/// (F)GW between reconstructions starting from the diagonal coupling;
/// gw_input solves between the original graphs.
Matrix pairwise_matrix(const Dictionary& d, const std::vector<Embedding>& embeddings, DistanceMode mode,
                       const std::vector<GraphRepr>* graphs = nullptr, const PairwiseOptions& opts = {});

Matrix kernel_matrix(const Matrix& D, double gamma);

struct KMeansResult {
  std::vector<int> labels;
  Matrix centroids;  // one row per cluster
  double cost = 0.0;  // sum of squared (metric) distances to the assigned centroid
};

/// Lloyd iterations with k-means++ seeding; rows of `points` are the items.
/// Best of `restarts` runs by within-cluster cost.
KMeansResult kmeans(const Matrix& points, int k, const std::optional<Matrix>& metric, std::uint64_t seed,
                    int restarts = 10, int max_iter = 300);

double rand_index(const std::vector<int>& a, const std::vector<int>& b);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Entries strictly above the diagonal, row by row.
std::vector<double> upper_triangle(const Matrix& m);

}  // namespace gdl
