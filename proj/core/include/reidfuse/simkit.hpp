#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "reidfuse/store.hpp"

namespace reidfuse {

/// Cosine of the angle between a and b, accumulated in double.
/// Throws DataError when either vector has zero norm or sizes differ.
double cosine(std::span<const float> a, std::span<const float> b);
double cosine(std::span<const float> a, std::span<const double> b);

/// Euclidean norm accumulated in double.
double norm(std::span<const float> v);

struct Neighbor {
    std::size_t index = 0;
    double similarity = 0.0;

    bool operator==(const Neighbor&) const = default;
};

/// Up to K gallery items nearest to a target, all from other cameras.
/// Sorted by descending similarity, ties by ascending index.
struct NeighborList {
    std::size_t target_index = 0;
    std::vector<Neighbor> neighbors;
};

/// Strict ordering used everywhere a similarity list is ranked:
/// higher similarity first, lower index first on ties.
inline bool ranks_before(double sim_a, std::size_t idx_a, double sim_b, std::size_t idx_b) {
    if (sim_a != sim_b) return sim_a > sim_b;
    return idx_a < idx_b;
}

/// K nearest gallery items to gallery[target_index] by cosine, restricted to
/// items whose camera differs from the target's. Returns fewer than K when
/// fewer are eligible, possibly none.
NeighborList knn_cross_camera(const FeatureSet& gallery, std::size_t target_index, std::size_t k);

/// knn_cross_camera for every gallery item; element j targets item j.
std::vector<NeighborList> knn_cross_camera_all(const FeatureSet& gallery, std::size_t k,
                                               std::size_t threads = 0);

/// Dense row-major matrix of doubles.
struct SimilarityMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(values).subspan(r * cols, cols);
    }
};

/// Entry (i, j) = cosine(queries[i], gallery[j]).
SimilarityMatrix similarity_matrix(const FeatureSet& queries, const FeatureSet& gallery,
                                   std::size_t threads = 0);

}  // namespace reidfuse
