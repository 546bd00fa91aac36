// Acceptance suite: one test case per shipping criterion, each printing a
// single [PASS]/[FAIL] line through the reporter below.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dendromatch/dbscan.hpp"
#include "dendromatch/dendrogram.hpp"
#include "dendromatch/embedding_io.hpp"
#include "dendromatch/hierarchy.hpp"
#include "dendromatch/matching.hpp"
#include "dendromatch/metric_space.hpp"
#include "dendromatch/mst.hpp"
#include "dendromatch/synthgen.hpp"

using namespace dendromatch;
namespace fs = std::filesystem;

namespace {

struct CriterionReporter : doctest::IReporter {
    std::string current;

    explicit CriterionReporter(const doctest::ContextOptions&) {}

    void report_query(const doctest::QueryData&) override {}
    void test_run_start() override {}
    void test_run_end(const doctest::TestRunStats&) override {}
    void test_case_start(const doctest::TestCaseData& data) override { current = data.m_name; }
    void test_case_reenter(const doctest::TestCaseData&) override {}
    void test_case_end(const doctest::CurrentTestCaseStats& stats) override {
        std::printf("[%s] %s\n", stats.testCaseSuccess ? "PASS" : "FAIL", current.c_str());
        std::fflush(stdout);
    }
    void test_case_exception(const doctest::TestCaseException&) override {}
    void subcase_start(const doctest::SubcaseSignature&) override {}
    void subcase_end() override {}
    void log_assert(const doctest::AssertData&) override {}
    void log_message(const doctest::MessageData&) override {}
    void test_case_skipped(const doctest::TestCaseData&) override {}
};

REGISTER_LISTENER("criteria", 1, CriterionReporter);

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

EmbeddingSet random_points(std::size_t n, std::size_t d, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> coord(-1, 1);
    EmbeddingSet set;
    set.n = n;
    set.d = d;
    for (std::size_t i = 0; i < n; ++i) {
        set.ids.push_back("p" + std::to_string(i));
        for (std::size_t k = 0; k < d; ++k) set.data.push_back(coord(gen));
    }
    return set;
}

std::vector<std::uint32_t> range_set(std::uint32_t lo, std::uint32_t hi) {
    std::vector<std::uint32_t> out(hi - lo);
    std::iota(out.begin(), out.end(), lo);
    return out;
}

}  // namespace

TEST_CASE("criterion 1: flat_cut over the mutual-reachability MST equals DBSCAN") {
    auto start = Clock::now();
    for (std::size_t dim : {std::size_t(2), std::size_t(8)}) {
        auto set = random_points(200, dim, dim == 2 ? 101 : 808);
        auto base = pairwise_distance(set);
        double max_dist = 0;
        for (std::size_t i = 0; i < set.n; ++i)
            for (std::size_t j = i + 1; j < set.n; ++j) max_dist = std::max(max_dist, base(i, j));

        std::mt19937_64 gen(555);
        std::uniform_real_distribution<double> eps_dist(1e-3, max_dist * 0.8);
        std::uniform_int_distribution<int> mp_dist(0, 12);
        for (int config = 0; config < 50; ++config) {
            double eps = eps_dist(gen);
            int min_pts = mp_dist(gen);

            auto reference = dbscan_flat(base, eps, min_pts);
            auto core = core_distances(base, min_pts);
            auto mst = build_mst(mutual_reachability(base, core));
            auto cut = flat_cut(mst, core, eps);

            REQUIRE(cut.cluster_count == reference.cluster_count);
            REQUIRE(cut.assignment == reference.assignment);
        }
    }
    CHECK(seconds_since(start) < 10.0);
}

namespace {

// Naive O(n^3) agglomerative single linkage: scan every cluster pair and
// every cross pair per merge.
std::vector<double> naive_single_linkage_heights(const DistanceMatrix& d) {
    std::vector<std::vector<std::uint32_t>> clusters;
    for (std::uint32_t i = 0; i < d.size(); ++i) clusters.push_back({i});
    std::vector<double> heights;
    while (clusters.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 1;
        for (std::size_t i = 0; i < clusters.size(); ++i)
            for (std::size_t j = i + 1; j < clusters.size(); ++j)
                for (auto p : clusters[i])
                    for (auto q : clusters[j])
                        if (d(p, q) < best) {
                            best = d(p, q);
                            bi = i;
                            bj = j;
                        }
        heights.push_back(best);
        clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
        clusters.erase(clusters.begin() + bj);
    }
    return heights;
}

// Partition by connected components of the <= eps graph, ids by smallest
// member -- independent of any MST machinery.
std::vector<int> graph_components(const DistanceMatrix& d, double eps) {
    std::vector<int> label(d.size(), -1);
    int next = 0;
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (label[i] != -1) continue;
        label[i] = next;
        stack.assign(1, i);
        while (!stack.empty()) {
            auto p = stack.back();
            stack.pop_back();
            for (std::size_t q = 0; q < d.size(); ++q)
                if (label[q] == -1 && d(p, q) <= eps) {
                    label[q] = next;
                    stack.push_back(q);
                }
        }
        ++next;
    }
    return label;
}

}  // namespace

TEST_CASE("criterion 2: SLINK merge heights match a naive agglomerative oracle") {
    auto start = Clock::now();
    auto set = random_points(100, 3, 321);
    auto base = pairwise_distance(set);
    auto core = core_distances(base, 0);
    auto mst = build_mst(base);
    auto link = mst_to_linkage(mst);

    auto oracle_heights = naive_single_linkage_heights(base);
    REQUIRE(link.merges.size() == oracle_heights.size());
    for (std::size_t i = 0; i < oracle_heights.size(); ++i)
        REQUIRE(link.merges[i].height == doctest::Approx(oracle_heights[i]).epsilon(1e-9));

    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> cut(1e-6, oracle_heights.back() * 1.1);
    for (int trial = 0; trial < 10; ++trial) {
        double eps = cut(gen);
        auto mine = flat_cut(mst, core, eps);
        auto expect = graph_components(base, eps);
        REQUIRE(mine.assignment == expect);
    }
    CHECK(seconds_since(start) < 5.0);
}

TEST_CASE("criterion 3: precision 0.81 / recall 0.73 scores") {
    auto c = range_set(0, 8100);
    std::vector<std::uint32_t> k = range_set(0, 5913);
    auto tail = range_set(8100, 8100 + 1387);
    k.insert(k.end(), tail.begin(), tail.end());

    auto s = pair_score(c, k);
    CHECK(s.precision == 0.81);
    CHECK(s.recall == 0.73);
    CHECK(s.l_score == 0.73);
    CHECK(s.limiting_factor == LimitingFactor::recall);
    CHECK(std::abs(s.f_score - 0.7679) <= 0.0005);
}

TEST_CASE("criterion 4: score laws on 1000 random set pairs") {
    std::mt19937_64 gen(4444);
    std::uniform_int_distribution<int> size_dist(1, 120);
    std::uniform_int_distribution<std::uint32_t> elem(0, 199);
    for (int trial = 0; trial < 1000; ++trial) {
        std::set<std::uint32_t> sa, sb;
        for (int i = size_dist(gen); i > 0; --i) sa.insert(elem(gen));
        for (int i = size_dist(gen); i > 0; --i) sb.insert(elem(gen));
        std::vector<std::uint32_t> a(sa.begin(), sa.end()), b(sb.begin(), sb.end());

        auto s = pair_score(a, b);
        REQUIRE(s.l_score <= s.f_score);
        REQUIRE(s.f_score >= 0.0);
        REQUIRE(s.f_score <= 1.0);
        REQUIRE(s.l_score >= 0.0);
        REQUIRE(s.l_score <= 1.0);
        if (s.precision == s.recall)
            REQUIRE(std::abs(s.l_score - s.f_score) <= 1e-12);
        else
            REQUIRE(s.f_score - s.l_score > 1e-12);
    }
}

TEST_CASE("criterion 5: CCM is exactly 1.0 when every division appears in K") {
    std::mt19937_64 gen(55);
    std::uniform_int_distribution<int> cls(0, 6);
    std::vector<std::vector<std::uint32_t>> members(7);
    for (std::uint32_t i = 0; i < 300; ++i) members[cls(gen)].push_back(i);

    std::vector<ClassDivision> divisions;
    std::vector<MatchableCluster> clusters;
    std::uint32_t id = 0;
    for (int i = 0; i < 7; ++i)
        if (!members[i].empty())
            divisions.push_back({"c" + std::to_string(i), DivisionKind::individual, members[i]});
    std::vector<std::vector<std::uint32_t>> extra = {range_set(0, 300), range_set(13, 99),
                                                     range_set(250, 280)};
    for (const auto& e : extra) clusters.push_back({id++, e});
    for (const auto& d : divisions) clusters.push_back({id++, d.members});

    CHECK(ccm_overall(divisions, clusters, Metric::f) == 1.0);
    CHECK(ccm_overall(divisions, clusters, Metric::l) == 1.0);
}

namespace {

// Fully independent greedy reference: recomputes precision/recall from the
// raw sets at every iteration and applies the documented tie cascade.
std::vector<std::pair<std::string, std::uint32_t>> exhaustive_greedy(
    const std::vector<ClassDivision>& pool, const std::vector<MatchableCluster>& clusters,
    Metric metric) {
    auto raw_score = [&](const std::vector<std::uint32_t>& c,
                         std::span<const std::uint32_t> k) {
        std::size_t inter = 0;
        for (auto x : c)
            if (std::find(k.begin(), k.end(), x) != k.end()) ++inter;
        double p = double(inter) / double(k.size());
        double r = double(inter) / double(c.size());
        if (metric == Metric::l) return std::min(p, r);
        return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    };

    std::vector<std::pair<std::string, std::uint32_t>> out;
    std::set<std::string> consumed;
    for (std::size_t round = 0; round < pool.size(); ++round) {
        double best = -1.0;
        std::size_t bi = 0, bj = 0;
        bool first = true;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (consumed.count(pool[i].name)) continue;
            for (std::size_t j = 0; j < clusters.size(); ++j) {
                double s = raw_score(pool[i].members, clusters[j].members);
                bool wins;
                if (first) {
                    wins = true;
                    first = false;
                } else if (s != best) {
                    wins = s > best;
                } else if (pool[i].members.size() != pool[bi].members.size()) {
                    wins = pool[i].members.size() > pool[bi].members.size();
                } else if (pool[i].name != pool[bi].name) {
                    wins = pool[i].name < pool[bi].name;
                } else {
                    wins = clusters[j].id < clusters[bj].id;
                }
                if (wins) {
                    best = s;
                    bi = i;
                    bj = j;
                }
            }
        }
        consumed.insert(pool[bi].name);
        out.emplace_back(pool[bi].name, clusters[bj].id);
    }
    return out;
}

}  // namespace

TEST_CASE("criterion 6: greedy matcher equals the per-iteration exhaustive argmax") {
    std::mt19937_64 gen(600);
    std::uniform_int_distribution<int> n_classes(1, 8), n_clusters(1, 12), n_points(8, 50);
    for (int instance = 0; instance < 30; ++instance) {
        int n = n_points(gen);
        std::uniform_int_distribution<std::uint32_t> elem(0, n - 1);
        std::uniform_int_distribution<int> set_size(1, n);
        auto random_sorted_set = [&]() {
            std::set<std::uint32_t> s;
            for (int i = set_size(gen); i > 0; --i) s.insert(elem(gen));
            return std::vector<std::uint32_t>(s.begin(), s.end());
        };

        std::vector<ClassDivision> pool;
        int nc = n_classes(gen);
        for (int i = 0; i < nc; ++i)
            pool.push_back(
                {"class" + std::to_string(i), DivisionKind::individual, random_sorted_set()});
        std::vector<std::vector<std::uint32_t>> sets;
        for (int i = n_clusters(gen); i > 0; --i) sets.push_back(random_sorted_set());
        std::vector<MatchableCluster> clusters;
        for (std::size_t j = 0; j < sets.size(); ++j)
            clusters.push_back({static_cast<std::uint32_t>(j), sets[j]});

        Metric metric = instance % 2 == 0 ? Metric::l : Metric::f;
        auto report = hccm_match(pool, clusters, metric);
        auto expect = exhaustive_greedy(pool, clusters, metric);
        REQUIRE(report.pairs.size() == expect.size());
        for (std::size_t i = 0; i < expect.size(); ++i) {
            REQUIRE(report.pairs[i].class_name == expect[i].first);
            REQUIRE(report.pairs[i].cluster_id == expect[i].second);
            if (i > 0) REQUIRE(report.pairs[i].score <= report.pairs[i - 1].score);
        }
    }
}

TEST_CASE("criterion 7: end-to-end exact recovery on well-separated synthetic data") {
    auto start = Clock::now();
    SynthConfig cfg;  // 2 genders x 3 nations x 2 identities x 20 points
    cfg.seed = 7;
    auto data = generate(cfg);
    REQUIRE(data.embeddings.n == 240);

    auto base = pairwise_distance(data.embeddings);
    auto core = core_distances(base, 0);  // SLINK
    auto mst = build_mst(mutual_reachability(base, core));
    auto h = build_hierarchy(mst_to_linkage(mst), 1);
    auto clusters = clusters_for_matching(h, 2);

    std::map<std::string, std::vector<ClassDivision>> per_category;
    for (const auto& category : data.labels.categories) {
        auto divisions = divisions_from_labels(data.labels, data.embeddings, category);
        CHECK(ccm_overall(divisions, clusters, Metric::f) == 1.0);
        CHECK(ccm_overall(divisions, clusters, Metric::l) == 1.0);
        per_category.emplace(category, std::move(divisions));
    }

    std::vector<ClassDivision> pool;
    for (const auto& category : data.labels.categories) {
        const auto& divs = per_category.at(category);
        pool.insert(pool.end(), divs.begin(), divs.end());
    }
    auto conj = conjunctive_divisions(per_category.at("gender"), per_category.at("nation"));
    CHECK(conj.size() == 6);  // nations nest inside genders
    pool.insert(pool.end(), conj.begin(), conj.end());

    auto report = hccm_match(pool, clusters, Metric::l);
    REQUIRE(report.pairs.size() == pool.size());
    for (const auto& p : report.pairs) CHECK(p.score == 1.0);
    CHECK(seconds_since(start) < 10.0);
}

TEST_CASE("criterion 8: CCM degrades monotonically from min_pts 0 to 27") {
    SynthConfig cfg;
    cfg.nations = 2;
    cfg.identities = 2;
    cfg.points_per_identity = 30;
    cfg.sep_identity = 1.0;  // identity balls touch (radius 0.5)
    cfg.sep_nation = 16.0;
    cfg.sep_gender = 48.0;
    cfg.allow_overlap = true;
    cfg.seed = 88;
    auto data = generate(cfg);

    auto base = pairwise_distance(data.embeddings);
    auto degrees = [&](int min_pts) {
        auto core = core_distances(base, min_pts);
        auto mst = build_mst(mutual_reachability(base, core));
        auto h = build_hierarchy(mst_to_linkage(mst), 1);
        auto clusters = clusters_for_matching(h, 2);
        std::map<std::string, std::pair<double, double>> out;
        for (const auto& category : data.labels.categories) {
            auto divisions = divisions_from_labels(data.labels, data.embeddings, category);
            out[category] = {ccm_overall(divisions, clusters, Metric::f),
                             ccm_overall(divisions, clusters, Metric::l)};
        }
        return out;
    };

    auto at0 = degrees(0);
    auto at27 = degrees(27);
    for (const auto& [category, d0] : at0) {
        auto d27 = at27.at(category);
        CHECK(d0.first >= d27.first);    // f metric
        CHECK(d0.second >= d27.second);  // l metric
    }
}

namespace {

int run_cli(const std::string& args) {
    const char* env = std::getenv("DENDROMATCH_CLI");
    std::string exe = env ? env : DENDROMATCH_CLI_PATH;
    std::string cmd = exe + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("criterion 9: pipeline reruns are byte-identical") {
    auto tmp = fs::temp_directory_path() / "dendromatch_acceptance";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    auto data_dir = (tmp / "data").string();

    REQUIRE(run_cli("synth --out-dir " + data_dir + " --seed 12") == 0);
    std::string manifest = "pipeline --embeddings " + data_dir + "/embeddings.csv --labels " +
                           data_dir + "/labels.csv --min-pts 0,2,8,27 --metric l --out-dir ";
    REQUIRE(run_cli(manifest + (tmp / "run1").string()) == 0);
    REQUIRE(run_cli(manifest + (tmp / "run2").string()) == 0);

    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(tmp / "run1"))
        names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    REQUIRE(!names.empty());
    bool saw_hierarchy = false, saw_ccm = false, saw_report = false, saw_render = false;
    for (const auto& name : names) {
        CHECK(slurp(tmp / "run1" / name) == slurp(tmp / "run2" / name));
        saw_hierarchy |= name.rfind("hierarchy_", 0) == 0;
        saw_ccm |= name == "ccm.csv";
        saw_report |= name.rfind("match_report_", 0) == 0;
        saw_render |= name == "dendrogram.svg" || name == "dendrogram.json";
    }
    CHECK(saw_hierarchy);
    CHECK(saw_ccm);
    CHECK(saw_report);
    CHECK(saw_render);

    // input error path: missing labels file exits with code 2
    CHECK(run_cli("evaluate --embeddings " + data_dir + "/embeddings.csv --labels " + data_dir +
                  "/absent.csv --out-dir " + (tmp / "err").string()) == 2);
}

TEST_CASE("criterion 10: render conserves widths and filters labels below 0.25") {
    LinkageTree link;
    link.n = 8;
    link.merges = {
        {0, 1, 1.0, 2}, {2, 3, 1.0, 2},  {4, 5, 1.0, 2},  {6, 7, 1.0, 2},
        {8, 9, 2.0, 4}, {10, 11, 2.0, 4}, {12, 13, 4.0, 8},
    };
    auto h = build_hierarchy(link, 2);

    MatchReport report;
    report.metric = Metric::l;
    MatchPair keep;
    keep.rank = 1;
    keep.class_name = "kept";
    keep.cluster_id = 1;
    keep.score = 0.26;
    keep.detail = {1.0, 0.26, 0.4, 0.26, LimitingFactor::recall};
    MatchPair drop = keep;
    drop.rank = 2;
    drop.class_name = "dropped";
    drop.cluster_id = 2;
    drop.score = 0.24;
    drop.detail = {0.24, 1.0, 0.38, 0.24, LimitingFactor::precision};
    report.pairs = {keep, drop};

    RenderSpec spec;
    spec.display_size_threshold = 0;
    spec.min_display_score = 0.25;

    auto doc = nlohmann::json::parse(render_json(h, report, spec));
    for (const auto& jn : doc["nodes"]) {
        if (jn["children"].empty()) continue;
        double parent_end = jn["breakpoints"].back()[1].get<double>();
        double child_sum = 0;
        for (const auto& cid : jn["children"])
            for (const auto& jc : doc["nodes"])
                if (jc["id"] == cid) child_sum += jc["breakpoints"][0][1].get<double>();
        CHECK(parent_end == child_sum);
    }

    auto svg = render_svg(h, report, spec);
    CHECK(svg.find("kept rec: 0.26") != std::string::npos);
    CHECK(svg.find("dropped") == std::string::npos);
}
