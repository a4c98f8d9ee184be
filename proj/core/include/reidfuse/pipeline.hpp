#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "reidfuse/fusion.hpp"
#include "reidfuse/store.hpp"

namespace reidfuse {

/// alpha*s_single + beta*s_refined + gamma*cce. The intercept is never added.
inline double combined_score(double s_single, double s_refined, double cce_value,
                             const CombinationWeights& w) noexcept {
    return w.alpha * s_single + w.beta * s_refined + w.gamma * cce_value;
}

/// Weights that reduce the combined score to plain single-view cosine.
CombinationWeights baseline_weights();
/// Weights that rank by the multi-view (refined) similarity alone.
CombinationWeights refined_only_weights();

/// Refined features that simply echo each gallery feature; lets the baseline
/// run through the same scoring path without fusion.
std::vector<RefinedFeature> passthrough_features(const FeatureSet& gallery);

struct RankedItem {
    std::size_t gallery_index = 0;
    double score = 0.0;

    bool operator==(const RankedItem&) const = default;
};

struct RankingResult {
    std::size_t query_index = 0;
    /// Every gallery index exactly once, descending score, ascending index on ties.
    std::vector<RankedItem> ordered_gallery;
    /// Indexed by gallery index. false marks an entry sharing both identity
    /// and camera with the query; such entries stay in ordered_gallery but
    /// are skipped by evaluation.
    std::vector<bool> valid_mask;
};

/// Scores every (query, gallery) pair with combined_score over
/// cos(q, g_j), cos(q, refined_j) and cce(q, g_j), then sorts each query's
/// gallery. refined[j] must belong to gallery item j.
std::vector<RankingResult> rank_all(const FeatureSet& queries, const FeatureSet& gallery,
                                    const std::vector<RefinedFeature>& refined, const CombinationWeights& w,
                                    std::size_t threads = 0);

struct QueryAp {
    std::size_t query_index = 0;
    double ap = 0.0;
};

struct EvalReport {
    /// cmc[k-1] = fraction of valid queries whose first match is at rank <= k.
    std::vector<double> cmc;
    double map = 0.0;
    std::vector<QueryAp> per_query_ap;   ///< valid queries only, in query order
    std::size_t num_queries = 0;
    std::size_t num_valid_queries = 0;   ///< queries with >= 1 relevant gallery item
    std::vector<std::pair<std::string, std::string>> config_echo;

    double rank1() const { return cmc.empty() ? 0.0 : cmc.front(); }
};

inline constexpr std::size_t kDefaultMaxRank = 50;

/// Cross-view evaluation. Entries sharing identity and camera with the query
/// are removed before computing metrics; distractors (negative person_id)
/// stay ranked but never count as relevant. Queries with no relevant item
/// are excluded from CMC and mAP.
EvalReport evaluate(const std::vector<RankingResult>& rankings, const FeatureSet& queries,
                    const FeatureSet& gallery, std::size_t max_rank = kDefaultMaxRank);

/// key=value rendering of a report. Doubles use shortest round-trip form.
std::string format_report(const EvalReport& report, const FeatureSet& queries);

/// rank_list.csv: query_item_id,rank,gallery_item_id,score,is_match,is_excluded.
/// Ranks are 1-based positions in the full (unfiltered) ordered list.
/// `header_comment`, when non-empty, is written first as a '#' line.
std::string format_rank_list(const std::vector<RankingResult>& rankings, const FeatureSet& queries,
                             const FeatureSet& gallery, const std::string& header_comment = {});

}  // namespace reidfuse
