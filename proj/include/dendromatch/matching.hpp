#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dendromatch/embedding_io.hpp"
#include "dendromatch/hierarchy.hpp"

namespace dendromatch {

enum class Metric { f, l };
enum class LimitingFactor { precision, recall, balanced };

Metric metric_from_string(const std::string& s);
std::string to_string(Metric m);
std::string to_string(LimitingFactor f);

/// Scores for one class/cluster pair. f_score = 2pr/(p+r) (0 when both are
/// 0); l_score = min(p, r); limiting_factor names the smaller of the two,
/// "balanced" when they tie.
struct PairScore {
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
    double l_score = 0.0;
    LimitingFactor limiting_factor = LimitingFactor::balanced;
};

PairScore pair_score(std::span<const std::uint32_t> class_members,
                     std::span<const std::uint32_t> cluster_members);

/// Size-weighted average, over the divisions of one category, of each
/// division's best score across all clusters.
double ccm_overall(const std::vector<ClassDivision>& divisions,
                   const std::vector<MatchableCluster>& clusters, Metric metric);

/// Pairwise intersections of divisions from two different categories, empty
/// results dropped, named "a&b". Rejects inputs whose every intersection is
/// empty (two passes over the same category).
std::vector<ClassDivision> conjunctive_divisions(const std::vector<ClassDivision>& a,
                                                 const std::vector<ClassDivision>& b);

struct MatchPair {
    std::uint32_t rank = 0;  // 1-based
    std::string class_name;
    DivisionKind kind = DivisionKind::individual;
    std::uint32_t cluster_id = 0;
    double score = 0.0;
    PairScore detail;
    bool cluster_reused = false;  // cluster already appeared at an earlier rank
};

struct MatchReport {
    Metric metric = Metric::l;
    std::vector<MatchPair> pairs;  // scores non-increasing in rank
    std::size_t individual_count = 0;
    std::size_t conjunctive_count = 0;
};

/// Greedy matching: each round pairs the remaining class and any cluster
/// with the highest score, then retires the class. Clusters can be matched
/// repeatedly. Ties break by (score desc, |class| desc, class name asc,
/// cluster id asc).
MatchReport hccm_match(const std::vector<ClassDivision>& pool,
                       const std::vector<MatchableCluster>& clusters, Metric metric);

std::string report_to_json(const MatchReport& report);
MatchReport report_from_json(const std::string& text);

}  // namespace dendromatch
