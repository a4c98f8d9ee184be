#pragma once

#include <cstddef>
#include <vector>

#include "reidfuse/simkit.hpp"
#include "reidfuse/store.hpp"

namespace reidfuse {

enum class RefinedKind {
    URF,  ///< uncertainty-refined: label-free, similarity-weighted
    RF,   ///< certain: label-guided, uniform mean
};

struct Contributor {
    std::size_t index = 0;
    double weight = 0.0;

    bool operator==(const Contributor&) const = default;
};

/// A multi-view feature built from neighbors of one source item.
/// An empty contributor list means the source feature was passed through
/// unchanged (no eligible neighbors, or a vanishing weight denominator).
struct RefinedFeature {
    std::size_t source_index = 0;
    std::vector<float> vector;
    RefinedKind kind = RefinedKind::URF;
    std::vector<Contributor> contributors;

    bool is_fallback() const noexcept { return contributors.empty(); }
};

/// Below this magnitude the sum of neighbor cosines is treated as zero and
/// the source feature is used as-is.
inline constexpr double kUffmDenominatorGuard = 1e-6;

/// Similarity-weighted fusion of the K nearest cross-camera neighbors of
/// gallery[target_index]:
///
///   w_k = cos(f_j, f_k) / sum_i cos(f_j, f_i),   urf_j = sum_k w_k * f_k
///
/// Negative cosines give negative weights; weights always sum to one.
/// The result is not renormalised.
RefinedFeature uffm_fuse(const FeatureSet& gallery, std::size_t target_index, std::size_t k);

/// Same, from an already computed neighbor list.
RefinedFeature uffm_fuse(const FeatureSet& gallery, const NeighborList& neighbors);

/// uffm_fuse for every gallery item, in gallery order.
std::vector<RefinedFeature> uffm_fuse_all(const FeatureSet& gallery, std::size_t k, std::size_t threads = 0);

/// Uniform mean of the K most similar images sharing train[target_index]'s
/// identity (the target itself excluded). Candidates from other cameras are
/// used when any exist, otherwise same-camera ones. If the identity has no
/// other image the target's own feature is returned with no contributors.
/// Throws DataError for a distractor target (negative person_id).
RefinedFeature cffm_fuse(const FeatureSet& train, std::size_t target_index, std::size_t k);

}  // namespace reidfuse
