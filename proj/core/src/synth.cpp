#include "reidfuse/synth.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "reidfuse/error.hpp"
#include "reidfuse/rng.hpp"

namespace reidfuse {

void SynthConfig::validate() const {
    if (num_identities < 2) throw UsageError("synth: num_identities must be >= 2 (train and test both need ids)");
    if (cams < 2) throw UsageError("synth: cams must be >= 2 to guarantee cross-camera matches");
    if (images_per_id_per_cam < 2) {
        throw UsageError("synth: images_per_id_per_cam must be >= 2 (one query plus gallery images per camera)");
    }
    if (dim < 1) throw UsageError("synth: dim must be >= 1");
    if (cams > dim) throw UsageError("synth: cams must not exceed dim (camera offsets are orthogonal)");
    if (!(identity_spread >= 0.0) || !(camera_bias_scale >= 0.0) || !(noise_scale >= 0.0)) {
        throw UsageError("synth: scales must be finite and >= 0");
    }
    if (!std::isfinite(identity_spread) || !std::isfinite(camera_bias_scale) || !std::isfinite(noise_scale)) {
        throw UsageError("synth: scales must be finite and >= 0");
    }
}

namespace {

// Random orthonormal directions via Gram-Schmidt on Gaussian vectors.
std::vector<std::vector<double>> orthonormal_directions(Rng& rng, int count, int dim) {
    std::vector<std::vector<double>> dirs;
    while (static_cast<int>(dirs.size()) < count) {
        std::vector<double> v(static_cast<std::size_t>(dim));
        for (auto& x : v) x = rng.normal();
        for (const auto& u : dirs) {
            double dot = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * u[i];
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * u[i];
        }
        double n = 0.0;
        for (double x : v) n += x * x;
        n = std::sqrt(n);
        if (n < 1e-9) continue;  // degenerate draw, try again
        for (auto& x : v) x /= n;
        dirs.push_back(std::move(v));
    }
    return dirs;
}

}  // namespace

SynthData generate(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);
    const auto dim = static_cast<std::size_t>(config.dim);

    std::vector<std::vector<double>> centers(static_cast<std::size_t>(config.num_identities),
                                             std::vector<double>(dim));
    for (auto& c : centers) {
        for (auto& x : c) x = config.identity_spread * rng.normal();
    }

    auto offsets = orthonormal_directions(rng, config.cams, config.dim);
    const double offset_norm = config.camera_bias_scale * std::sqrt(static_cast<double>(dim));
    for (auto& o : offsets) {
        for (auto& x : o) x *= offset_norm;
    }

    const int num_train = config.num_identities / 2;
    std::vector<FeatureRecord> train;
    std::vector<FeatureRecord> queries;
    std::vector<FeatureRecord> gallery;
    for (int pid = 0; pid < config.num_identities; ++pid) {
        const bool is_train = pid < num_train;
        for (int cam = 0; cam < config.cams; ++cam) {
            for (int img = 0; img < config.images_per_id_per_cam; ++img) {
                FeatureRecord r;
                r.person_id = pid;
                r.camera_id = cam;
                r.item_id = "p" + std::to_string(pid) + "_c" + std::to_string(cam) + "_" + std::to_string(img);
                r.feature.resize(dim);
                const auto& center = centers[static_cast<std::size_t>(pid)];
                const auto& offset = offsets[static_cast<std::size_t>(cam)];
                for (std::size_t d = 0; d < dim; ++d) {
                    const double v = center[d] + offset[d] + config.noise_scale * rng.normal();
                    r.feature[d] = static_cast<float>(v);
                }
                if (is_train) {
                    train.push_back(std::move(r));
                } else if (img == 0) {
                    queries.push_back(std::move(r));
                } else {
                    gallery.push_back(std::move(r));
                }
            }
        }
    }
    return {FeatureSet(std::move(train), Role::Train), FeatureSet(std::move(queries), Role::Query),
            FeatureSet(std::move(gallery), Role::Gallery)};
}

}  // namespace reidfuse
