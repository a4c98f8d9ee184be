#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "reidfuse/rng.hpp"
#include "reidfuse/store.hpp"

namespace reidfuse {

/// Camera-equality indicator: 1 when both images come from the same camera,
/// 0 otherwise.
int cce(const FeatureRecord& a, const FeatureRecord& b) noexcept;

/// One regression sample: the three measures between an anchor and another
/// image, labelled +1 (same identity) or -1 (different identity).
struct MeasureVector {
    double s_single = 0.0;
    double s_refined = 0.0;
    int cce = 0;
    int label = 1;

    bool operator==(const MeasureVector&) const = default;
};

struct Triplet {
    std::size_t anchor = 0;
    std::size_t positive = 0;
    std::size_t negative = 0;

    bool operator==(const Triplet&) const = default;
};

/// Regression data produced by the triplet generator. rows[2i] is the
/// positive row of step i and rows[2i + 1] its negative row.
struct TripletDataset {
    std::vector<MeasureVector> rows;
    std::vector<Triplet> triplets;
    std::uint64_t seed = 0;
    std::size_t n = 0;
};

/// Draws (anchor, positive, negative) index triples from a labelled set.
///
/// Per draw, in this order:
///   1. anchor   = eligible[uniform_index(|eligible|)], where eligible lists,
///                 in index order, every labelled image whose identity has at
///                 least two images;
///   2. positive = r-th image (index order) of the anchor's identity with the
///                 anchor removed, r = uniform_index(|identity| - 1);
///   3. negative = r-th labelled image (index order) of any other identity,
///                 r = uniform_index(|labelled| - |identity|).
/// Distractors (negative person_id) never take part.
class TripletSampler {
public:
    explicit TripletSampler(const FeatureSet& train);

    Triplet sample(Rng& rng) const;

    std::size_t eligible_anchor_count() const noexcept { return eligible_.size(); }

private:
    std::vector<std::size_t> labelled_;               // labelled image indices, ascending
    std::vector<std::size_t> eligible_;               // anchors with >=1 positive available
    std::vector<std::vector<std::size_t>> members_;   // per dense identity slot
    std::vector<std::size_t> slot_of_;                // image index -> identity slot
};

Triplet sample_triplet(const FeatureSet& train, Rng& rng);

/// Runs n generator steps seeded with `seed`. Each step samples a triplet,
/// refines the positive and the negative with cffm_fuse(K), and appends a
/// +1 row (cos(a,p), cos(a,RF_p), cce(a,p)) and a -1 row for the negative.
TripletDataset build_triplet_dataset(const FeatureSet& train, std::size_t n, std::size_t k,
                                     std::uint64_t seed);

/// Ridge strength used when the normal equations are rank deficient.
inline constexpr double kRidgeLambda = 1e-8;

/// Least-squares fit of label ~ alpha*s_single + beta*s_refined + gamma*cce + intercept.
/// k_used/n_used/seed are copied from the dataset metadata by the caller.
CombinationWeights fit_weights(const TripletDataset& data);

struct WeightSpread {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double intercept = 0.0;
};

struct RepeatedFit {
    CombinationWeights mean;              ///< run_index = -1
    std::vector<CombinationWeights> runs; ///< runs[r] used seed base_seed + r
    WeightSpread stddev;                  ///< population standard deviation over runs
};

/// build_triplet_dataset + fit_weights for seeds base_seed .. base_seed+repeats-1.
/// Repeats may run concurrently; results do not depend on `threads`.
RepeatedFit fit_weights_repeated(const FeatureSet& train, std::size_t n, std::size_t k,
                                 std::uint64_t base_seed, std::size_t repeats = 5,
                                 std::size_t threads = 0);

}  // namespace reidfuse
