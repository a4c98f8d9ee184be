#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "../oracles.hpp"
#include "reidfuse/error.hpp"
#include "reidfuse/fusion.hpp"

using namespace reidfuse;

namespace {

FeatureSet make_set(const std::vector<FeatureRecord>& recs, Role role = Role::Gallery) {
    return FeatureSet(recs, role);
}

double weight_sum(const RefinedFeature& rf) {
    double s = 0.0;
    for (const auto& c : rf.contributors) s += c.weight;
    return s;
}

}  // namespace

TEST_CASE("uffm: zero-similarity neighbor contributes nothing") {
    const auto g = make_set({{"t", 0, 0, {1, 0}}, {"a", 1, 1, {1, 0}}, {"b", 2, 1, {0, 1}}});
    const auto rf = uffm_fuse(g, 0, 2);
    REQUIRE(rf.contributors.size() == 2);
    CHECK(rf.kind == RefinedKind::URF);
    CHECK(rf.contributors[0].index == 1);
    CHECK(rf.contributors[0].weight == doctest::Approx(1.0));
    CHECK(rf.contributors[1].weight == doctest::Approx(0.0));
    CHECK(rf.vector == std::vector<float>{1.0f, 0.0f});
}

TEST_CASE("uffm: weighted fusion of two neighbors") {
    const auto g = make_set({{"t", 0, 0, {1, 0}}, {"a", 1, 1, {1, 0}}, {"b", 2, 2, {0.7071f, 0.7071f}}});
    const auto rf = uffm_fuse(g, 0, 2);
    REQUIRE(rf.contributors.size() == 2);
    // expected values from an independent numpy evaluation of the weighting rule
    CHECK(rf.contributors[0].weight == doctest::Approx(0.58578644).epsilon(1e-7));
    CHECK(rf.contributors[1].weight == doctest::Approx(0.41421356).epsilon(1e-7));
    CHECK(rf.vector[0] == doctest::Approx(0.87867684).epsilon(1e-6));
    CHECK(rf.vector[1] == doctest::Approx(0.2928904).epsilon(1e-6));
}

TEST_CASE("uffm fallbacks") {
    SUBCASE("no cross-camera neighbor") {
        const auto g = make_set({{"t", 0, 0, {1, 2}}, {"a", 1, 0, {3, 4}}});
        const auto rf = uffm_fuse(g, 0, 4);
        CHECK(rf.is_fallback());
        CHECK(rf.vector == g[0].feature);
    }
    SUBCASE("vanishing denominator") {
        const auto g = make_set({{"t", 0, 0, {1, 0}}, {"a", 1, 1, {1, 1}}, {"b", 2, 1, {-1, 1}}});
        // cosines +0.7071 and -0.7071 cancel
        const auto rf = uffm_fuse(g, 0, 2);
        CHECK(rf.is_fallback());
        CHECK(rf.vector == g[0].feature);
    }
    SUBCASE("fewer than K neighbors uses all available") {
        const auto g = make_set({{"t", 0, 0, {1, 0}}, {"a", 1, 1, {1, 1}}, {"b", 2, 0, {1, 0}}});
        const auto rf = uffm_fuse(g, 0, 4);
        REQUIRE(rf.contributors.size() == 1);
        CHECK(rf.contributors[0].index == 1);
        CHECK(rf.vector == g[1].feature);
    }
    CHECK_THROWS_AS(uffm_fuse(make_set({{"t", 0, 0, {1}}}), 1, 1), UsageError);
}

TEST_CASE("uffm negative weights still normalise to one") {
    // one neighbor strongly aligned, one anti-aligned: weights > 1 and < 0
    const auto g = make_set({{"t", 0, 0, {1, 0}}, {"a", 1, 1, {1, 0.1f}}, {"b", 2, 1, {-1, 0.5f}}});
    const auto rf = uffm_fuse(g, 0, 2);
    REQUIRE(rf.contributors.size() == 2);
    CHECK(rf.contributors[1].weight < 0.0);
    CHECK(weight_sum(rf) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uffm_fuse_all properties over random galleries") {
    Rng rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(80);
        const std::size_t k = 1 + rng.uniform_index(6);
        const auto g = oracle::random_set(rng, n, 1 + rng.uniform_index(12), 10, 1 + static_cast<int>(rng.uniform_index(4)));
        const auto all = uffm_fuse_all(g, k, 2);
        REQUIRE(all.size() == n);
        for (std::size_t j = 0; j < n; ++j) {
            const auto& rf = all[j];
            CHECK(rf.source_index == j);
            CHECK(rf.vector == uffm_fuse(g, j, k).vector);
            if (!rf.is_fallback()) CHECK(std::abs(weight_sum(rf) - 1.0) <= 1e-6);
            for (const auto& c : rf.contributors) CHECK(g[c.index].camera_id != g[j].camera_id);
            for (float v : rf.vector) CHECK(std::isfinite(v));
        }
    }
}

TEST_CASE("uffm K=1 reduces to the nearest cross-camera neighbor") {
    Rng rng(1);
    const auto g = oracle::random_set(rng, 60, 8, 12, 3);
    const auto all = uffm_fuse_all(g, 1);
    for (std::size_t j = 0; j < g.size(); ++j) {
        const auto nn = oracle::knn(g, j, 1);
        if (nn.empty()) continue;
        CHECK(all[j].vector == g[nn[0]].feature);
    }
}

TEST_CASE("uffm is permutation equivariant") {
    Rng rng(31);
    const auto g = oracle::random_set(rng, 50, 10, 8, 3);
    std::vector<std::size_t> perm(g.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_index(i)]);

    std::vector<FeatureRecord> shuffled;
    for (std::size_t p : perm) shuffled.push_back(g[p]);
    const FeatureSet gs(std::move(shuffled), Role::Gallery);

    const auto base = uffm_fuse_all(g, 4);
    const auto moved = uffm_fuse_all(gs, 4);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        for (std::size_t d = 0; d < g.dim(); ++d) {
            CHECK(moved[i].vector[d] == doctest::Approx(base[perm[i]].vector[d]).epsilon(1e-6));
        }
    }
}

TEST_CASE("uffm weights are invariant to positive scaling of the gallery") {
    Rng rng(4);
    const auto g = oracle::random_set(rng, 40, 6, 8, 3);
    std::vector<FeatureRecord> scaled(g.begin(), g.end());
    for (auto& r : scaled) {
        for (auto& v : r.feature) v *= 7.5f;
    }
    const FeatureSet gs(std::move(scaled), Role::Gallery);
    const std::vector<float> q{0.3f, -0.2f, 1.0f, 0.5f, 0.0f, -1.1f};
    for (std::size_t j = 0; j < g.size(); ++j) {
        const auto a = uffm_fuse(g, j, 3);
        const auto b = uffm_fuse(gs, j, 3);
        REQUIRE(a.contributors.size() == b.contributors.size());
        for (std::size_t c = 0; c < a.contributors.size(); ++c) {
            CHECK(std::abs(a.contributors[c].weight - b.contributors[c].weight) <= 1e-6);
        }
        CHECK(std::abs(cosine(q, a.vector) - cosine(q, b.vector)) <= 1e-6);
    }
}

TEST_CASE("cffm") {
    SUBCASE("mean of identical vectors") {
        const auto t = make_set({{"t", 0, 0, {9, 9}}, {"a", 0, 1, {2, 3}}, {"b", 0, 1, {2, 3}}, {"c", 0, 2, {2, 3}}},
                                Role::Train);
        const auto rf = cffm_fuse(t, 0, 3);
        CHECK(rf.kind == RefinedKind::RF);
        CHECK(rf.vector == std::vector<float>{2, 3});
        for (const auto& c : rf.contributors) CHECK(c.weight == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("arithmetic mean") {
        const auto t = make_set({{"t", 0, 0, {1, 1}}, {"a", 0, 1, {1, 0}}, {"b", 0, 2, {0, 1}}, {"x", 1, 1, {1, 1}}},
                                Role::Train);
        CHECK(cffm_fuse(t, 0, 2).vector == std::vector<float>{0.5f, 0.5f});
    }
    SUBCASE("prefers other cameras, falls back to same camera") {
        const auto t = make_set({{"t", 0, 0, {1, 0}}, {"same", 0, 0, {1, 0}}, {"other", 0, 1, {0, 1}}}, Role::Train);
        const auto rf = cffm_fuse(t, 0, 2);
        REQUIRE(rf.contributors.size() == 1);
        CHECK(rf.contributors[0].index == 2);
        const auto only_same = make_set({{"t", 0, 0, {1, 0}}, {"same", 0, 0, {0, 1}}}, Role::Train);
        CHECK(cffm_fuse(only_same, 0, 2).vector == std::vector<float>{0, 1});
    }
    SUBCASE("singleton identity passes through") {
        const auto t = make_set({{"t", 0, 0, {1, 2}}, {"x", 1, 1, {1, 1}}}, Role::Train);
        const auto rf = cffm_fuse(t, 0, 2);
        CHECK(rf.is_fallback());
        CHECK(rf.vector == t[0].feature);
    }
    SUBCASE("distractor target is rejected") {
        const auto t = make_set({{"t", -1, 0, {1, 2}}, {"x", 1, 1, {1, 1}}}, Role::Train);
        CHECK_THROWS_AS(cffm_fuse(t, 0, 2), DataError);
    }
}

TEST_CASE("cffm matches the full-sort oracle") {
    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const auto t = oracle::random_set(rng, 120, 12, 15, 4, Role::Train);
        for (std::size_t j = 0; j < t.size(); ++j) {
            const auto rf = cffm_fuse(t, j, 4);
            const auto expected = oracle::cffm(t, j, 4);
            double max_diff = 0.0;
            for (std::size_t d = 0; d < t.dim(); ++d) max_diff = std::max(max_diff, std::abs(rf.vector[d] - expected[d]));
            CHECK(max_diff <= 1e-6);
        }
    }
}
