#include "reidfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reidfuse/error.hpp"
#include "reidfuse/parallel.hpp"

namespace reidfuse {

namespace {

RefinedFeature passthrough(const FeatureSet& set, std::size_t index, RefinedKind kind) {
    const auto f = set.feature(index);
    return {index, std::vector<float>(f.begin(), f.end()), kind, {}};
}

std::vector<float> weighted_sum(const FeatureSet& set, const std::vector<Contributor>& contributors) {
    std::vector<double> acc(set.dim(), 0.0);
    for (const auto& c : contributors) {
        const auto f = set.feature(c.index);
        for (std::size_t d = 0; d < acc.size(); ++d) acc[d] += c.weight * static_cast<double>(f[d]);
    }
    std::vector<float> out(acc.size());
    std::transform(acc.begin(), acc.end(), out.begin(), [](double v) { return static_cast<float>(v); });
    return out;
}

}  // namespace

RefinedFeature uffm_fuse(const FeatureSet& gallery, const NeighborList& neighbors) {
    const std::size_t target = neighbors.target_index;
    if (neighbors.neighbors.empty()) return passthrough(gallery, target, RefinedKind::URF);

    double denom = 0.0;
    for (const auto& n : neighbors.neighbors) denom += n.similarity;
    if (std::abs(denom) < kUffmDenominatorGuard) return passthrough(gallery, target, RefinedKind::URF);

    std::vector<Contributor> contributors;
    contributors.reserve(neighbors.neighbors.size());
    for (const auto& n : neighbors.neighbors) contributors.push_back({n.index, n.similarity / denom});

    RefinedFeature out;
    out.source_index = target;
    out.kind = RefinedKind::URF;
    out.vector = weighted_sum(gallery, contributors);
    if (norm(out.vector) == 0.0) return passthrough(gallery, target, RefinedKind::URF);
    out.contributors = std::move(contributors);
    return out;
}

RefinedFeature uffm_fuse(const FeatureSet& gallery, std::size_t target_index, std::size_t k) {
    return uffm_fuse(gallery, knn_cross_camera(gallery, target_index, k));
}

std::vector<RefinedFeature> uffm_fuse_all(const FeatureSet& gallery, std::size_t k, std::size_t threads) {
    if (k == 0) throw UsageError("uffm_fuse_all: K must be >= 1");
    std::vector<RefinedFeature> out(gallery.size());
    parallel_for(gallery.size(), threads, [&](std::size_t j) { out[j] = uffm_fuse(gallery, j, k); });
    return out;
}

RefinedFeature cffm_fuse(const FeatureSet& train, std::size_t target_index, std::size_t k) {
    if (k == 0) throw UsageError("cffm_fuse: K must be >= 1");
    const auto& target = train.at(target_index);
    if (target.person_id < 0) {
        throw DataError("cffm_fuse: item '" + target.item_id + "' is a distractor and cannot be refined");
    }

    std::vector<Neighbor> cross;
    std::vector<Neighbor> same;
    for (std::size_t j = 0; j < train.size(); ++j) {
        if (j == target_index || train[j].person_id != target.person_id) continue;
        Neighbor n{j, cosine(target.feature, train.feature(j))};
        (train[j].camera_id != target.camera_id ? cross : same).push_back(n);
    }
    auto& pool = cross.empty() ? same : cross;
    if (pool.empty()) return passthrough(train, target_index, RefinedKind::RF);

    const std::size_t take = std::min(k, pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take), pool.end(),
                      [](const Neighbor& a, const Neighbor& b) {
                          return ranks_before(a.similarity, a.index, b.similarity, b.index);
                      });

    const double w = 1.0 / static_cast<double>(take);
    std::vector<Contributor> contributors;
    contributors.reserve(take);
    for (std::size_t i = 0; i < take; ++i) contributors.push_back({pool[i].index, w});

    RefinedFeature out;
    out.source_index = target_index;
    out.kind = RefinedKind::RF;
    out.vector = weighted_sum(train, contributors);
    if (norm(out.vector) == 0.0) return passthrough(train, target_index, RefinedKind::RF);
    out.contributors = std::move(contributors);
    return out;
}

}  // namespace reidfuse
