#include "reidfuse/amc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>

#include "reidfuse/error.hpp"
#include "reidfuse/fusion.hpp"
#include "reidfuse/parallel.hpp"
#include "reidfuse/simkit.hpp"

namespace reidfuse {

int cce(const FeatureRecord& a, const FeatureRecord& b) noexcept {
    return a.camera_id == b.camera_id ? 1 : 0;
}

// --- sampling ----------------------------------------------------------------

TripletSampler::TripletSampler(const FeatureSet& train) : slot_of_(train.size(), 0) {
    std::map<int, std::size_t> slot_by_person;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const int pid = train[i].person_id;
        if (pid < 0) continue;
        auto [it, inserted] = slot_by_person.try_emplace(pid, members_.size());
        if (inserted) members_.emplace_back();
        members_[it->second].push_back(i);
        slot_of_[i] = it->second;
        labelled_.push_back(i);
    }
    if (members_.size() < 2) {
        throw DataError("triplet sampling needs at least 2 labelled identities, found " +
                        std::to_string(members_.size()));
    }
    for (std::size_t i : labelled_) {
        if (members_[slot_of_[i]].size() >= 2) eligible_.push_back(i);
    }
    if (eligible_.empty()) {
        throw DataError("triplet sampling needs an identity with at least 2 images; every labelled identity "
                        "has a single image");
    }
}

Triplet TripletSampler::sample(Rng& rng) const {
    Triplet t;
    t.anchor = eligible_[rng.uniform_index(eligible_.size())];

    const auto& same = members_[slot_of_[t.anchor]];
    std::size_t r = rng.uniform_index(same.size() - 1);
    for (std::size_t idx : same) {
        if (idx == t.anchor) continue;
        if (r == 0) {
            t.positive = idx;
            break;
        }
        --r;
    }

    r = rng.uniform_index(labelled_.size() - same.size());
    const std::size_t anchor_slot = slot_of_[t.anchor];
    for (std::size_t idx : labelled_) {
        if (slot_of_[idx] == anchor_slot) continue;
        if (r == 0) {
            t.negative = idx;
            break;
        }
        --r;
    }
    return t;
}

Triplet sample_triplet(const FeatureSet& train, Rng& rng) { return TripletSampler(train).sample(rng); }

// --- dataset -----------------------------------------------------------------

TripletDataset build_triplet_dataset(const FeatureSet& train, std::size_t n, std::size_t k,
                                     std::uint64_t seed) {
    if (n == 0) throw UsageError("build_triplet_dataset: n must be >= 1");
    if (k == 0) throw UsageError("build_triplet_dataset: K must be >= 1");

    const TripletSampler sampler(train);
    Rng rng(seed);
    std::vector<std::optional<RefinedFeature>> refined(train.size());
    auto refined_of = [&](std::size_t i) -> const RefinedFeature& {
        if (!refined[i]) refined[i] = cffm_fuse(train, i, k);
        return *refined[i];
    };
    auto row_for = [&](std::size_t anchor, std::size_t other, int label) {
        const auto& fa = train[anchor].feature;
        return MeasureVector{cosine(fa, train.feature(other)), cosine(fa, refined_of(other).vector),
                             cce(train[anchor], train[other]), label};
    };

    TripletDataset data;
    data.seed = seed;
    data.n = n;
    data.rows.reserve(2 * n);
    data.triplets.reserve(n);
    for (std::size_t step = 0; step < n; ++step) {
        const Triplet t = sampler.sample(rng);
        data.rows.push_back(row_for(t.anchor, t.positive, +1));
        data.rows.push_back(row_for(t.anchor, t.negative, -1));
        data.triplets.push_back(t);
    }
    return data;
}

// --- least squares -----------------------------------------------------------

namespace {

using Mat4 = std::array<std::array<double, 4>, 4>;
using Vec4 = std::array<double, 4>;

// Cholesky solve of a symmetric positive (semi)definite 4x4 system. Returns
// nullopt when a pivot drops to `pivot_tol` times its original diagonal entry
// or below, i.e. when a column is (numerically) a combination of the
// previous ones.
std::optional<Vec4> cholesky_solve(const Mat4& a, const Vec4& b, double pivot_tol) {
    Mat4 l{};
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i][j];
            for (std::size_t p = 0; p < j; ++p) s -= l[i][p] * l[j][p];
            if (i == j) {
                if (!(a[i][i] > 0.0) || s <= pivot_tol * a[i][i]) return std::nullopt;
                l[i][i] = std::sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Vec4 y{};
    for (std::size_t i = 0; i < 4; ++i) {
        double s = b[i];
        for (std::size_t p = 0; p < i; ++p) s -= l[i][p] * y[p];
        y[i] = s / l[i][i];
    }
    Vec4 x{};
    for (std::size_t i = 4; i-- > 0;) {
        double s = y[i];
        for (std::size_t p = i + 1; p < 4; ++p) s -= l[p][i] * x[p];
        x[i] = s / l[i][i];
    }
    return x;
}

}  // namespace

CombinationWeights fit_weights(const TripletDataset& data) {
    if (data.rows.size() < 4) {
        throw UsageError("fit_weights: need at least 4 rows, got " + std::to_string(data.rows.size()));
    }
    // design columns: s_single, s_refined, cce, 1
    Mat4 xtx{};
    Vec4 xty{};
    for (const auto& r : data.rows) {
        const Vec4 x{r.s_single, r.s_refined, static_cast<double>(r.cce), 1.0};
        const double y = r.label;
        for (std::size_t i = 0; i < 4; ++i) {
            xty[i] += x[i] * y;
            for (std::size_t j = 0; j < 4; ++j) xtx[i][j] += x[i] * x[j];
        }
    }

    CombinationWeights w;
    constexpr double kRankTol = 1e-10;
    auto solution = cholesky_solve(xtx, xty, kRankTol);
    if (!solution) {
        w.ridge_fallback = true;
        Mat4 reg = xtx;
        for (std::size_t i = 0; i < 4; ++i) reg[i][i] += kRidgeLambda;
        solution = cholesky_solve(reg, xty, 0.0);
        if (!solution) throw InvariantError("fit_weights: ridge-regularised system is still singular");
    }
    const Vec4& s = *solution;
    w.alpha = s[0];
    w.beta = s[1];
    w.gamma = s[2];
    w.intercept = s[3];
    w.n_used = static_cast<std::int64_t>(data.n);
    w.seed = static_cast<std::int64_t>(data.seed);
    if (!w.all_finite()) throw InvariantError("fit_weights: non-finite solution");
    return w;
}

RepeatedFit fit_weights_repeated(const FeatureSet& train, std::size_t n, std::size_t k,
                                 std::uint64_t base_seed, std::size_t repeats, std::size_t threads) {
    if (repeats == 0) throw UsageError("fit_weights_repeated: repeats must be >= 1");

    RepeatedFit out;
    out.runs.resize(repeats);
    parallel_for(repeats, threads, [&](std::size_t r) {
        auto w = fit_weights(build_triplet_dataset(train, n, k, base_seed + r));
        w.k_used = static_cast<std::int64_t>(k);
        w.run_index = static_cast<std::int64_t>(r);
        out.runs[r] = w;
    });

    const double count = static_cast<double>(repeats);
    auto& m = out.mean;
    m = CombinationWeights{0.0, 0.0, 0.0, 0.0};
    for (const auto& w : out.runs) {
        m.alpha += w.alpha;
        m.beta += w.beta;
        m.gamma += w.gamma;
        m.intercept += w.intercept;
        m.ridge_fallback = m.ridge_fallback || w.ridge_fallback;
    }
    m.alpha /= count;
    m.beta /= count;
    m.gamma /= count;
    m.intercept /= count;
    m.k_used = static_cast<std::int64_t>(k);
    m.n_used = static_cast<std::int64_t>(n);
    m.seed = static_cast<std::int64_t>(base_seed);
    m.run_index = -1;

    auto& sd = out.stddev;
    for (const auto& w : out.runs) {
        sd.alpha += (w.alpha - m.alpha) * (w.alpha - m.alpha);
        sd.beta += (w.beta - m.beta) * (w.beta - m.beta);
        sd.gamma += (w.gamma - m.gamma) * (w.gamma - m.gamma);
        sd.intercept += (w.intercept - m.intercept) * (w.intercept - m.intercept);
    }
    sd.alpha = std::sqrt(sd.alpha / count);
    sd.beta = std::sqrt(sd.beta / count);
    sd.gamma = std::sqrt(sd.gamma / count);
    sd.intercept = std::sqrt(sd.intercept / count);
    return out;
}

}  // namespace reidfuse
