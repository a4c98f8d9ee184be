#include "reidfuse/pipeline.hpp"

#include <algorithm>
#include <string>

#include "reidfuse/amc.hpp"
#include "reidfuse/error.hpp"
#include "reidfuse/parallel.hpp"
#include "reidfuse/simkit.hpp"

namespace reidfuse {

CombinationWeights baseline_weights() {
    CombinationWeights w;
    w.alpha = 1.0;
    w.beta = 0.0;
    w.gamma = 0.0;
    return w;
}

CombinationWeights refined_only_weights() {
    CombinationWeights w;
    w.alpha = 0.0;
    w.beta = 1.0;
    w.gamma = 0.0;
    return w;
}

std::vector<RefinedFeature> passthrough_features(const FeatureSet& gallery) {
    std::vector<RefinedFeature> out;
    out.reserve(gallery.size());
    for (std::size_t j = 0; j < gallery.size(); ++j) {
        const auto f = gallery.feature(j);
        out.push_back({j, std::vector<float>(f.begin(), f.end()), RefinedKind::URF, {}});
    }
    return out;
}

std::vector<RankingResult> rank_all(const FeatureSet& queries, const FeatureSet& gallery,
                                    const std::vector<RefinedFeature>& refined, const CombinationWeights& w,
                                    std::size_t threads) {
    if (refined.size() != gallery.size()) {
        throw DataError("rank_all: " + std::to_string(refined.size()) + " refined features for a gallery of " +
                        std::to_string(gallery.size()));
    }
    if (!queries.empty() && !gallery.empty() && queries.dim() != gallery.dim()) {
        throw DataError("rank_all: query dim " + std::to_string(queries.dim()) + " != gallery dim " +
                        std::to_string(gallery.dim()));
    }
    for (std::size_t j = 0; j < refined.size(); ++j) {
        if (refined[j].vector.size() != gallery.dim()) {
            throw DataError("rank_all: refined feature " + std::to_string(j) + " has wrong dimension");
        }
    }

    std::vector<RankingResult> out(queries.size());
    parallel_for(queries.size(), threads, [&](std::size_t i) {
        const auto& q = queries[i];
        RankingResult& res = out[i];
        res.query_index = i;
        res.ordered_gallery.resize(gallery.size());
        res.valid_mask.resize(gallery.size());
        for (std::size_t j = 0; j < gallery.size(); ++j) {
            const auto& g = gallery[j];
            const double s_single = cosine(q.feature, g.feature);
            const double s_refined = cosine(q.feature, std::span<const float>(refined[j].vector));
            res.ordered_gallery[j] = {j, combined_score(s_single, s_refined, cce(q, g), w)};
            res.valid_mask[j] = !(g.person_id == q.person_id && g.camera_id == q.camera_id);
        }
        std::sort(res.ordered_gallery.begin(), res.ordered_gallery.end(),
                  [](const RankedItem& a, const RankedItem& b) {
                      return ranks_before(a.score, a.gallery_index, b.score, b.gallery_index);
                  });
    });
    return out;
}

namespace {

struct QueryMetrics {
    bool valid = false;
    std::size_t first_hit = 0;  // 1-based rank in the filtered list
    double ap = 0.0;
};

QueryMetrics score_query(const RankingResult& r, const FeatureSet& queries, const FeatureSet& gallery) {
    const auto& q = queries[r.query_index];
    QueryMetrics m;
    if (q.person_id < 0) return m;

    std::size_t rank = 0;
    std::size_t hits = 0;
    double precision_sum = 0.0;
    for (const auto& item : r.ordered_gallery) {
        if (!r.valid_mask[item.gallery_index]) continue;
        ++rank;
        if (gallery[item.gallery_index].person_id != q.person_id) continue;
        ++hits;
        if (hits == 1) m.first_hit = rank;
        precision_sum += static_cast<double>(hits) / static_cast<double>(rank);
    }
    if (hits == 0) return m;
    m.valid = true;
    m.ap = precision_sum / static_cast<double>(hits);
    return m;
}

}  // namespace

EvalReport evaluate(const std::vector<RankingResult>& rankings, const FeatureSet& queries,
                    const FeatureSet& gallery, std::size_t max_rank) {
    if (max_rank == 0) throw UsageError("evaluate: max_rank must be >= 1");
    for (const auto& r : rankings) {
        if (r.query_index >= queries.size() || r.ordered_gallery.size() != gallery.size() ||
            r.valid_mask.size() != gallery.size()) {
            throw InvariantError("evaluate: ranking does not match the query/gallery sets");
        }
    }

    std::vector<QueryMetrics> per(rankings.size());
    for (std::size_t i = 0; i < rankings.size(); ++i) per[i] = score_query(rankings[i], queries, gallery);

    EvalReport report;
    report.num_queries = rankings.size();
    report.cmc.assign(max_rank, 0.0);
    double ap_sum = 0.0;
    for (std::size_t i = 0; i < per.size(); ++i) {
        if (!per[i].valid) continue;
        ++report.num_valid_queries;
        ap_sum += per[i].ap;
        report.per_query_ap.push_back({rankings[i].query_index, per[i].ap});
        for (std::size_t k = per[i].first_hit; k <= max_rank; ++k) report.cmc[k - 1] += 1.0;
    }
    if (report.num_valid_queries > 0) {
        const double denom = static_cast<double>(report.num_valid_queries);
        for (auto& c : report.cmc) c /= denom;
        report.map = ap_sum / denom;
    }
    return report;
}

std::string format_report(const EvalReport& report, const FeatureSet& queries) {
    std::string out;
    for (const auto& [key, value] : report.config_echo) out += "config." + key + '=' + value + '\n';
    out += "num_queries=" + std::to_string(report.num_queries) + '\n';
    out += "num_valid_queries=" + std::to_string(report.num_valid_queries) + '\n';
    out += "num_excluded_queries=" + std::to_string(report.num_queries - report.num_valid_queries) + '\n';
    out += "rank1=" + format_double(report.rank1()) + '\n';
    out += "mAP=" + format_double(report.map) + '\n';
    out += "max_rank=" + std::to_string(report.cmc.size()) + '\n';
    for (std::size_t k = 0; k < report.cmc.size(); ++k) {
        out += "cmc." + std::to_string(k + 1) + '=' + format_double(report.cmc[k]) + '\n';
    }
    for (const auto& qa : report.per_query_ap) {
        out += "ap." + queries[qa.query_index].item_id + '=' + format_double(qa.ap) + '\n';
    }
    return out;
}

std::string format_rank_list(const std::vector<RankingResult>& rankings, const FeatureSet& queries,
                             const FeatureSet& gallery, const std::string& header_comment) {
    std::string out;
    if (!header_comment.empty()) out += "# " + header_comment + '\n';
    out += "query_item_id,rank,gallery_item_id,score,is_match,is_excluded\n";
    for (const auto& r : rankings) {
        const auto& q = queries[r.query_index];
        std::size_t rank = 0;
        for (const auto& item : r.ordered_gallery) {
            ++rank;
            const auto& g = gallery[item.gallery_index];
            const bool excluded = !r.valid_mask[item.gallery_index];
            const bool match = !excluded && q.person_id >= 0 && g.person_id == q.person_id;
            out += q.item_id + ',' + std::to_string(rank) + ',' + g.item_id + ',' + format_double(item.score) + ',' +
                   (match ? '1' : '0') + ',' + (excluded ? '1' : '0') + '\n';
        }
    }
    return out;
}

}  // namespace reidfuse
