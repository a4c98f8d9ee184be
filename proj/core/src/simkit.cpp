#include "reidfuse/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reidfuse/error.hpp"
#include "reidfuse/parallel.hpp"

namespace reidfuse {

namespace {

template <typename A, typename B>
double cosine_impl(std::span<const A> a, std::span<const B> b) {
    if (a.size() != b.size()) {
        throw DataError("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i];
        const double y = b[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) throw DataError("cosine: zero-norm input");
    const double c = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(c, -1.0, 1.0);
}

}  // namespace

double cosine(std::span<const float> a, std::span<const float> b) { return cosine_impl(a, b); }
double cosine(std::span<const float> a, std::span<const double> b) { return cosine_impl(a, b); }

double norm(std::span<const float> v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

NeighborList knn_cross_camera(const FeatureSet& gallery, std::size_t target_index, std::size_t k) {
    if (k == 0) throw UsageError("knn_cross_camera: K must be >= 1");
    const auto& target = gallery.at(target_index);

    std::vector<Neighbor> candidates;
    candidates.reserve(gallery.size());
    for (std::size_t j = 0; j < gallery.size(); ++j) {
        if (j == target_index || gallery[j].camera_id == target.camera_id) continue;
        candidates.push_back({j, cosine(target.feature, gallery.feature(j))});
    }

    auto cmp = [](const Neighbor& a, const Neighbor& b) {
        return ranks_before(a.similarity, a.index, b.similarity, b.index);
    };
    const std::size_t take = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end(), cmp);
    candidates.resize(take);
    return {target_index, std::move(candidates)};
}

std::vector<NeighborList> knn_cross_camera_all(const FeatureSet& gallery, std::size_t k, std::size_t threads) {
    if (k == 0) throw UsageError("knn_cross_camera: K must be >= 1");
    std::vector<NeighborList> out(gallery.size());
    parallel_for(gallery.size(), threads, [&](std::size_t j) { out[j] = knn_cross_camera(gallery, j, k); });
    return out;
}

SimilarityMatrix similarity_matrix(const FeatureSet& queries, const FeatureSet& gallery, std::size_t threads) {
    if (!queries.empty() && !gallery.empty() && queries.dim() != gallery.dim()) {
        throw DataError("similarity_matrix: dimension mismatch (" + std::to_string(queries.dim()) + " vs " +
                        std::to_string(gallery.dim()) + ")");
    }
    SimilarityMatrix m;
    m.rows = queries.size();
    m.cols = gallery.size();
    m.values.resize(m.rows * m.cols);
    parallel_for(m.rows, threads, [&](std::size_t i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            m.values[i * m.cols + j] = cosine(queries.feature(i), gallery.feature(j));
        }
    });
    return m;
}

}  // namespace reidfuse
