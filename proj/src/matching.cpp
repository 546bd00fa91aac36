#include "dendromatch/matching.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

#include "dendromatch/errors.hpp"

namespace dendromatch {

using nlohmann::json;

Metric metric_from_string(const std::string& s) {
    if (s == "f") return Metric::f;
    if (s == "l") return Metric::l;
    throw std::invalid_argument("unknown metric '" + s + "', expected 'f' or 'l'");
}

std::string to_string(Metric m) { return m == Metric::f ? "f" : "l"; }

std::string to_string(LimitingFactor f) {
    switch (f) {
        case LimitingFactor::precision: return "precision";
        case LimitingFactor::recall: return "recall";
        default: return "balanced";
    }
}

namespace {

LimitingFactor limiting_from_string(const std::string& s) {
    if (s == "precision") return LimitingFactor::precision;
    if (s == "recall") return LimitingFactor::recall;
    if (s == "balanced") return LimitingFactor::balanced;
    throw InputError("unknown limiting factor '" + s + "'");
}

std::size_t intersection_size(std::span<const std::uint32_t> a,
                              std::span<const std::uint32_t> b) {
    std::size_t count = 0, i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j])
            ++i;
        else if (b[j] < a[i])
            ++j;
        else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

double metric_value(const PairScore& s, Metric m) {
    return m == Metric::f ? s.f_score : s.l_score;
}

PairScore score_from_counts(std::size_t inter, std::size_t class_size,
                            std::size_t cluster_size) {
    PairScore s;
    const double a = static_cast<double>(inter);
    s.precision = a / static_cast<double>(cluster_size);
    s.recall = a / static_cast<double>(class_size);
    // Both forms of f and l below are single divisions of exactly
    // representable integers, which keeps l_score <= f_score under rounding.
    s.f_score = 2.0 * a / static_cast<double>(class_size + cluster_size);
    s.l_score = a / static_cast<double>(std::max(class_size, cluster_size));
    if (s.precision == s.recall)
        s.limiting_factor = LimitingFactor::balanced;
    else
        s.limiting_factor =
            s.precision < s.recall ? LimitingFactor::precision : LimitingFactor::recall;
    return s;
}

}  // namespace

PairScore pair_score(std::span<const std::uint32_t> class_members,
                     std::span<const std::uint32_t> cluster_members) {
    if (class_members.empty() || cluster_members.empty())
        throw std::invalid_argument("pair_score requires non-empty sets");
    return score_from_counts(intersection_size(class_members, cluster_members),
                             class_members.size(), cluster_members.size());
}

double ccm_overall(const std::vector<ClassDivision>& divisions,
                   const std::vector<MatchableCluster>& clusters, Metric metric) {
    if (divisions.empty()) throw std::invalid_argument("ccm_overall: empty division list");
    if (clusters.empty()) throw std::invalid_argument("ccm_overall: empty cluster list");

    std::vector<std::uint32_t> all;
    for (const auto& c : divisions) {
        if (c.members.empty()) throw std::invalid_argument("ccm_overall: empty division");
        all.insert(all.end(), c.members.begin(), c.members.end());
    }
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
        throw std::invalid_argument("ccm_overall: divisions overlap, not a partition");
    const double total = static_cast<double>(all.size());

    // Accumulate |c_i| * best_i and divide once, so a perfect match list
    // yields exactly 1.0.
    double weighted = 0.0;
    for (const auto& c : divisions) {
        double best = 0.0;
        for (const auto& k : clusters)
            best = std::max(best, metric_value(pair_score(c.members, k.members), metric));
        weighted += static_cast<double>(c.members.size()) * best;
    }
    return weighted / total;
}

std::vector<ClassDivision> conjunctive_divisions(const std::vector<ClassDivision>& a,
                                                 const std::vector<ClassDivision>& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("conjunctive_divisions: empty division list");

    std::vector<ClassDivision> out;
    for (const auto& ca : a) {
        for (const auto& cb : b) {
            if (ca.name == cb.name && ca.members == cb.members) continue;  // same class
            std::vector<std::uint32_t> inter;
            std::set_intersection(ca.members.begin(), ca.members.end(), cb.members.begin(),
                                  cb.members.end(), std::back_inserter(inter));
            if (inter.empty()) continue;
            out.push_back({ca.name + "&" + cb.name, DivisionKind::conjunctive, std::move(inter)});
        }
    }
    if (out.empty())
        throw std::invalid_argument(
            "conjunctive_divisions: every intersection is empty; the two lists appear to "
            "divide by the same category");
    return out;
}

MatchReport hccm_match(const std::vector<ClassDivision>& pool,
                       const std::vector<MatchableCluster>& clusters, Metric metric) {
    if (pool.empty()) throw std::invalid_argument("hccm_match: empty class pool");
    if (clusters.empty()) throw std::invalid_argument("hccm_match: empty cluster list");
    for (const auto& c : pool)
        if (c.members.empty()) throw std::invalid_argument("hccm_match: empty division");

    MatchReport report;
    report.metric = metric;
    for (const auto& c : pool)
        (c.kind == DivisionKind::individual ? report.individual_count
                                            : report.conjunctive_count)++;

    std::vector<std::vector<double>> scores(pool.size(),
                                            std::vector<double>(clusters.size()));
    std::vector<std::vector<std::size_t>> inters(pool.size(),
                                                 std::vector<std::size_t>(clusters.size()));
    for (std::size_t i = 0; i < pool.size(); ++i) {
        for (std::size_t j = 0; j < clusters.size(); ++j) {
            std::size_t inter = intersection_size(pool[i].members, clusters[j].members);
            inters[i][j] = inter;
            scores[i][j] = metric_value(
                score_from_counts(inter, pool[i].members.size(), clusters[j].members.size()),
                metric);
        }
    }

    // score desc, |class| desc, class name asc, cluster id asc
    auto better = [&](std::size_t i, std::size_t j, std::size_t bi, std::size_t bj) {
        if (scores[i][j] != scores[bi][bj]) return scores[i][j] > scores[bi][bj];
        if (pool[i].members.size() != pool[bi].members.size())
            return pool[i].members.size() > pool[bi].members.size();
        if (pool[i].name != pool[bi].name) return pool[i].name < pool[bi].name;
        return clusters[j].id < clusters[bj].id;
    };

    std::vector<bool> used(pool.size(), false);
    std::vector<bool> cluster_seen(clusters.size(), false);
    for (std::uint32_t rank = 1; rank <= pool.size(); ++rank) {
        std::size_t best_i = pool.size(), best_j = 0;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (used[i]) continue;
            for (std::size_t j = 0; j < clusters.size(); ++j)
                if (best_i == pool.size() || better(i, j, best_i, best_j)) {
                    best_i = i;
                    best_j = j;
                }
        }

        used[best_i] = true;
        MatchPair pair;
        pair.rank = rank;
        pair.class_name = pool[best_i].name;
        pair.kind = pool[best_i].kind;
        pair.cluster_id = clusters[best_j].id;
        pair.score = scores[best_i][best_j];
        pair.detail = score_from_counts(inters[best_i][best_j], pool[best_i].members.size(),
                                        clusters[best_j].members.size());
        pair.cluster_reused = cluster_seen[best_j];
        cluster_seen[best_j] = true;
        report.pairs.push_back(std::move(pair));
    }
    return report;
}

std::string report_to_json(const MatchReport& report) {
    json doc;
    doc["metric"] = to_string(report.metric);
    doc["pool"] = {{"individual", report.individual_count},
                   {"conjunctive", report.conjunctive_count}};
    json pairs = json::array();
    for (const auto& p : report.pairs) {
        json jp;
        jp["rank"] = p.rank;
        jp["class"] = p.class_name;
        jp["kind"] = p.kind == DivisionKind::individual ? "individual" : "conjunctive";
        jp["cluster_id"] = p.cluster_id;
        jp["score"] = p.score;
        jp["precision"] = p.detail.precision;
        jp["recall"] = p.detail.recall;
        jp["limiting_factor"] = to_string(p.detail.limiting_factor);
        jp["cluster_reused"] = p.cluster_reused;
        pairs.push_back(std::move(jp));
    }
    doc["pairs"] = std::move(pairs);
    return doc.dump(2) + "\n";
}

MatchReport report_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("match report JSON parse error: ") + e.what());
    }
    try {
        MatchReport report;
        report.metric = metric_from_string(doc.at("metric").get<std::string>());
        if (doc.contains("pool")) {
            report.individual_count = doc["pool"].value("individual", 0u);
            report.conjunctive_count = doc["pool"].value("conjunctive", 0u);
        }
        for (const auto& jp : doc.at("pairs")) {
            MatchPair p;
            p.rank = jp.at("rank").get<std::uint32_t>();
            p.class_name = jp.at("class").get<std::string>();
            p.kind = jp.at("kind").get<std::string>() == "conjunctive"
                         ? DivisionKind::conjunctive
                         : DivisionKind::individual;
            p.cluster_id = jp.at("cluster_id").get<std::uint32_t>();
            p.score = jp.at("score").get<double>();
            p.detail.precision = jp.at("precision").get<double>();
            p.detail.recall = jp.at("recall").get<double>();
            p.detail.limiting_factor = limiting_from_string(jp.at("limiting_factor"));
            p.detail.f_score = p.detail.precision + p.detail.recall == 0.0
                                   ? 0.0
                                   : 2.0 * p.detail.precision * p.detail.recall /
                                         (p.detail.precision + p.detail.recall);
            p.detail.l_score = std::min(p.detail.precision, p.detail.recall);
            p.cluster_reused = jp.value("cluster_reused", false);
            report.pairs.push_back(std::move(p));
        }
        return report;
    } catch (const json::exception& e) {
        throw InputError(std::string("match report JSON missing or mistyped field: ") + e.what());
    }
}

}  // namespace dendromatch
