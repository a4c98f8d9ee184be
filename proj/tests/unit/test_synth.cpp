#include "doctest.h"

#include <set>

#include "reidfuse/error.hpp"
#include "reidfuse/pipeline.hpp"
#include "reidfuse/synth.hpp"

using namespace reidfuse;

namespace {

double baseline_map(const SynthData& d) {
    return evaluate(rank_all(d.queries, d.gallery, passthrough_features(d.gallery), baseline_weights()), d.queries,
                    d.gallery)
        .map;
}

}  // namespace

TEST_CASE("synth split sizes and identity partition") {
    SynthConfig cfg;
    cfg.seed = 4;
    const auto d = generate(cfg);
    CHECK(d.train.size() == 25 * 4 * 3);
    CHECK(d.queries.size() == 25 * 4);
    CHECK(d.gallery.size() == 25 * 4 * 2);
    CHECK(d.train.dim() == 64);
    CHECK(d.train.role() == Role::Train);

    std::set<int> train_ids, test_ids;
    for (const auto& r : d.train) train_ids.insert(r.person_id);
    for (const auto& r : d.queries) test_ids.insert(r.person_id);
    for (const auto& r : d.gallery) test_ids.insert(r.person_id);
    for (int id : train_ids) CHECK(test_ids.count(id) == 0);

    for (const auto& q : d.queries) {
        bool cross = false;
        for (const auto& g : d.gallery) cross = cross || (g.person_id == q.person_id && g.camera_id != q.camera_id);
        CHECK(cross);
    }
}

TEST_CASE("synth is deterministic per seed") {
    SynthConfig cfg;
    cfg.seed = 99;
    const auto a = generate(cfg);
    const auto b = generate(cfg);
    CHECK(a.train == b.train);
    CHECK(a.queries == b.queries);
    CHECK(a.gallery == b.gallery);
    cfg.seed = 100;
    CHECK_FALSE(generate(cfg).gallery == a.gallery);
}

TEST_CASE("synth without bias or noise is perfectly separable") {
    SynthConfig cfg;
    cfg.camera_bias_scale = 0.0;
    cfg.noise_scale = 0.0;
    cfg.seed = 1;
    const auto d = generate(cfg);
    for (const auto& g : d.gallery) {
        for (const auto& q : d.queries) {
            if (q.person_id == g.person_id) CHECK(q.feature == g.feature);
        }
    }
    const auto r = evaluate(rank_all(d.queries, d.gallery, passthrough_features(d.gallery), baseline_weights()),
                            d.queries, d.gallery);
    CHECK(r.rank1() == 1.0);
    CHECK(r.num_valid_queries == d.queries.size());
}

TEST_CASE("baseline mAP never increases with camera bias") {
    for (std::uint64_t seed : {0u, 1u, 2u}) {
        double previous = 2.0;
        for (double bias : {0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0}) {
            SynthConfig cfg;
            cfg.seed = seed;
            cfg.camera_bias_scale = bias;
            const double m = baseline_map(generate(cfg));
            CHECK(m <= previous);
            previous = m;
        }
    }
}

TEST_CASE("synth rejects configurations without cross-camera matches") {
    SynthConfig cfg;
    cfg.cams = 1;
    CHECK_THROWS_AS(generate(cfg), UsageError);
    cfg = SynthConfig{};
    cfg.images_per_id_per_cam = 1;
    CHECK_THROWS_AS(generate(cfg), UsageError);
    cfg = SynthConfig{};
    cfg.noise_scale = -1;
    CHECK_THROWS_AS(generate(cfg), UsageError);
    cfg = SynthConfig{};
    cfg.cams = 8;
    cfg.dim = 4;
    CHECK_THROWS_AS(generate(cfg), UsageError);
}
