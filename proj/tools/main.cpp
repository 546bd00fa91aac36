#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dendromatch/dbscan.hpp"
#include "dendromatch/dendrogram.hpp"
#include "dendromatch/embedding_io.hpp"
#include "dendromatch/errors.hpp"
#include "dendromatch/hierarchy.hpp"
#include "dendromatch/matching.hpp"
#include "dendromatch/metric_space.hpp"
#include "dendromatch/mst.hpp"
#include "dendromatch/synthgen.hpp"
#include "internal/text.hpp"

namespace fs = std::filesystem;
using namespace dendromatch;

namespace {

struct Manifest {
    std::string embeddings;
    std::string ids;  // sidecar for raw-binary embeddings
    std::string format = "csv";
    std::string labels;
    std::vector<int> min_pts = {0, 2, 4, 6, 8, 12, 16, 21, 27};
    std::string metric = "l";
    std::uint32_t min_cluster_size = 1;
    std::uint32_t min_match_size = 2;
    std::uint32_t display_size_threshold = 800;
    double min_display = 0.25;
    std::string out_dir = ".";
    bool emit_members = false;
    bool dump_matrices = false;
    bool render = false;
    std::string conjunctive;  // "catA,catB"; empty = two smallest categories
    SynthConfig synth;
};

EmbeddingSet load_input_embeddings(const Manifest& m) {
    if (m.embeddings.empty()) throw InputError("--embeddings is required");
    if (m.format == "csv") return load_embeddings(m.embeddings, EmbeddingFormat::csv);
    if (m.format == "raw") {
        if (m.ids.empty()) throw InputError("--ids is required with --format raw");
        return load_embeddings(m.embeddings, EmbeddingFormat::raw_binary, m.ids);
    }
    throw InputError("unknown --format '" + m.format + "', expected csv or raw");
}

void ensure_out_dir(const Manifest& m) {
    std::error_code ec;
    fs::create_directories(m.out_dir, ec);
    if (ec) throw InputError("cannot create --out-dir " + m.out_dir + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path.string());
    out << text;
}

struct ClusterRun {
    int min_pts;
    ClusterHierarchy hierarchy;
    LinkageTree linkage;
};

ClusterRun run_clustering(const EmbeddingSet& set, const DistanceMatrix& base, int min_pts,
                          std::uint32_t min_cluster_size) {
    CoreDistances core = core_distances(base, min_pts);
    DistanceMatrix mr = mutual_reachability(base, core);
    MinimumSpanningTree mst = build_mst(mr);
    ClusterRun run;
    run.min_pts = min_pts;
    run.linkage = mst_to_linkage(mst);
    run.hierarchy = build_hierarchy(run.linkage, min_cluster_size);
    return run;
}

fs::path hierarchy_path(const Manifest& m, int min_pts) {
    return fs::path(m.out_dir) / ("hierarchy_minpts" + std::to_string(min_pts) + ".json");
}

void write_cluster_outputs(const Manifest& m, const ClusterRun& run) {
    write_text(hierarchy_path(m, run.min_pts),
               hierarchy_to_json(run.hierarchy, m.emit_members, run.min_pts));
    write_linkage_csv(run.linkage,
                      fs::path(m.out_dir) /
                          ("linkage_minpts" + std::to_string(run.min_pts) + ".csv"));
}

int cmd_synth(const Manifest& m) {
    ensure_out_dir(m);
    SynthResult result = generate(m.synth);
    write_embeddings_csv(result.embeddings, fs::path(m.out_dir) / "embeddings.csv");
    write_labels_csv(result.labels, fs::path(m.out_dir) / "labels.csv");
    std::cout << "wrote " << result.embeddings.n << " points of dimension "
              << result.embeddings.d << " to " << m.out_dir << "\n";
    return 0;
}

int cmd_cluster(const Manifest& m) {
    ensure_out_dir(m);
    EmbeddingSet set = load_input_embeddings(m);
    DistanceMatrix base = pairwise_distance(set);
    if (m.dump_matrices)
        write_matrix(base, fs::path(m.out_dir) / "distance_base.dmx");
    for (int mp : m.min_pts) {
        ClusterRun run = run_clustering(set, base, mp, m.min_cluster_size);
        write_cluster_outputs(m, run);
        if (m.dump_matrices) {
            CoreDistances core = core_distances(base, mp);
            write_matrix(mutual_reachability(base, core),
                         fs::path(m.out_dir) /
                             ("distance_mr_minpts" + std::to_string(mp) + ".dmx"));
        }
        std::cout << "min_pts=" << mp << ": " << run.hierarchy.nodes.size()
                  << " hierarchy nodes\n";
    }
    return 0;
}

// One CCM row per (min_pts, category, metric).
std::string ccm_table(const EmbeddingSet& set, const LabelTable& table,
                      const std::vector<ClusterRun>& runs, std::uint32_t min_match_size) {
    std::string csv = "min_pts,category,metric,degree\n";
    for (const auto& run : runs) {
        auto clusters = clusters_for_matching(run.hierarchy, min_match_size);
        for (const auto& category : table.categories) {
            auto divisions = divisions_from_labels(table, set, category);
            for (Metric metric : {Metric::f, Metric::l}) {
                double degree = ccm_overall(divisions, clusters, metric);
                csv += std::to_string(run.min_pts) + "," + category + "," + to_string(metric) +
                       "," + detail::format_double(degree) + "\n";
            }
        }
    }
    return csv;
}

int cmd_evaluate(const Manifest& m) {
    ensure_out_dir(m);
    if (m.labels.empty()) throw InputError("--labels is required");
    EmbeddingSet set = load_input_embeddings(m);
    LabelTable table = load_labels(m.labels);
    DistanceMatrix base = pairwise_distance(set);
    std::vector<ClusterRun> runs;
    for (int mp : m.min_pts) runs.push_back(run_clustering(set, base, mp, m.min_cluster_size));
    write_text(fs::path(m.out_dir) / "ccm.csv", ccm_table(set, table, runs, m.min_match_size));
    return 0;
}

// Individual divisions of every category plus the conjunctive divisions of
// one category pair (default: the two categories with the fewest classes).
std::vector<ClassDivision> build_pool(const EmbeddingSet& set, const LabelTable& table,
                                      const std::string& conjunctive_choice) {
    if (table.categories.size() < 2)
        throw InputError("conjunctive divisions need at least two label categories");

    std::map<std::string, std::vector<ClassDivision>> per_category;
    std::vector<ClassDivision> pool;
    for (const auto& category : table.categories) {
        auto divisions = divisions_from_labels(table, set, category);
        pool.insert(pool.end(), divisions.begin(), divisions.end());
        per_category.emplace(category, std::move(divisions));
    }

    std::string cat_a, cat_b;
    if (!conjunctive_choice.empty()) {
        auto comma = conjunctive_choice.find(',');
        if (comma == std::string::npos)
            throw InputError("--conjunctive expects 'categoryA,categoryB'");
        cat_a = conjunctive_choice.substr(0, comma);
        cat_b = conjunctive_choice.substr(comma + 1);
        if (!per_category.count(cat_a) || !per_category.count(cat_b) || cat_a == cat_b)
            throw InputError("--conjunctive must name two distinct label categories");
    } else {
        std::vector<std::string> order(table.categories);
        std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
            auto na = per_category.at(a).size(), nb = per_category.at(b).size();
            return na != nb ? na < nb : a < b;
        });
        cat_a = order[0];
        cat_b = order[1];
    }

    auto conj = conjunctive_divisions(per_category.at(cat_a), per_category.at(cat_b));
    pool.insert(pool.end(), conj.begin(), conj.end());
    return pool;
}

int cmd_interpret(const Manifest& m) {
    ensure_out_dir(m);
    if (m.labels.empty()) throw InputError("--labels is required");
    if (m.min_pts.size() != 1)
        throw InputError("interpret expects a single --min-pts value");
    EmbeddingSet set = load_input_embeddings(m);
    LabelTable table = load_labels(m.labels);
    DistanceMatrix base = pairwise_distance(set);

    ClusterRun run = run_clustering(set, base, m.min_pts[0], m.min_cluster_size);
    auto clusters = clusters_for_matching(run.hierarchy, m.min_match_size);
    auto pool = build_pool(set, table, m.conjunctive);
    MatchReport report = hccm_match(pool, clusters, metric_from_string(m.metric));
    write_text(fs::path(m.out_dir) /
                   ("match_report_minpts" + std::to_string(run.min_pts) + ".json"),
               report_to_json(report));

    if (m.render) {
        RenderSpec spec;
        spec.display_size_threshold = m.display_size_threshold;
        spec.min_display_score = m.min_display;
        write_text(fs::path(m.out_dir) / "dendrogram.svg",
                   render_svg(run.hierarchy, report, spec));
        write_text(fs::path(m.out_dir) / "dendrogram.json",
                   render_json(run.hierarchy, report, spec));
    }
    return 0;
}

int cmd_render(const Manifest& m, const std::string& hierarchy_file,
               const std::string& report_file) {
    ensure_out_dir(m);
    std::ifstream hin(hierarchy_file);
    if (!hin) throw InputError("cannot open file: " + hierarchy_file);
    std::string htext((std::istreambuf_iterator<char>(hin)), std::istreambuf_iterator<char>());
    std::ifstream rin(report_file);
    if (!rin) throw InputError("cannot open file: " + report_file);
    std::string rtext((std::istreambuf_iterator<char>(rin)), std::istreambuf_iterator<char>());

    ClusterHierarchy h = hierarchy_from_json(htext);
    MatchReport report = report_from_json(rtext);
    RenderSpec spec;
    spec.display_size_threshold = m.display_size_threshold;
    spec.min_display_score = m.min_display;
    write_text(fs::path(m.out_dir) / "dendrogram.svg", render_svg(h, report, spec));
    write_text(fs::path(m.out_dir) / "dendrogram.json", render_json(h, report, spec));
    return 0;
}

int cmd_pipeline(const Manifest& m) {
    ensure_out_dir(m);
    if (m.labels.empty()) throw InputError("--labels is required");
    EmbeddingSet set = load_input_embeddings(m);
    LabelTable table = load_labels(m.labels);
    DistanceMatrix base = pairwise_distance(set);

    std::vector<ClusterRun> runs;
    for (int mp : m.min_pts) {
        runs.push_back(run_clustering(set, base, mp, m.min_cluster_size));
        write_cluster_outputs(m, runs.back());
    }
    write_text(fs::path(m.out_dir) / "ccm.csv", ccm_table(set, table, runs, m.min_match_size));

    // Interpret the run with the best mean CCM degree under the report
    // metric; ties go to the smaller min_pts.
    Metric metric = metric_from_string(m.metric);
    std::size_t best = 0;
    double best_degree = -1.0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        auto clusters = clusters_for_matching(runs[i].hierarchy, m.min_match_size);
        double sum = 0.0;
        for (const auto& category : table.categories)
            sum += ccm_overall(divisions_from_labels(table, set, category), clusters, metric);
        double mean = sum / static_cast<double>(table.categories.size());
        if (mean > best_degree) {
            best_degree = mean;
            best = i;
        }
    }
    const ClusterRun& chosen = runs[best];
    std::cout << "interpreting min_pts=" << chosen.min_pts << " (mean CCM degree "
              << detail::format_double(best_degree) << ")\n";

    auto clusters = clusters_for_matching(chosen.hierarchy, m.min_match_size);
    auto pool = build_pool(set, table, m.conjunctive);
    MatchReport report = hccm_match(pool, clusters, metric);
    write_text(fs::path(m.out_dir) /
                   ("match_report_minpts" + std::to_string(chosen.min_pts) + ".json"),
               report_to_json(report));

    RenderSpec spec;
    spec.display_size_threshold = m.display_size_threshold;
    spec.min_display_score = m.min_display;
    write_text(fs::path(m.out_dir) / "dendrogram.svg",
               render_svg(chosen.hierarchy, report, spec));
    write_text(fs::path(m.out_dir) / "dendrogram.json",
               render_json(chosen.hierarchy, report, spec));
    return 0;
}

void add_io_options(CLI::App* cmd, Manifest& m, bool with_labels) {
    cmd->add_option("--embeddings", m.embeddings, "embeddings file (csv or raw-binary)");
    cmd->add_option("--format", m.format, "embeddings format: csv | raw")
        ->check(CLI::IsMember({"csv", "raw"}));
    cmd->add_option("--ids", m.ids, "id sidecar file for raw-binary embeddings");
    if (with_labels) cmd->add_option("--labels", m.labels, "labels csv");
    cmd->add_option("--out-dir", m.out_dir, "output directory");
}

void add_cluster_options(CLI::App* cmd, Manifest& m) {
    cmd->add_option("--min-pts", m.min_pts,
                    "comma-separated min_pts values (0 = plain single linkage)")
        ->delimiter(',');
    cmd->add_option("--min-cluster-size", m.min_cluster_size,
                    "minimum size for a hierarchy node to split off");
    cmd->add_flag("--emit-members", m.emit_members, "include member lists in hierarchy JSON");
}

void add_match_options(CLI::App* cmd, Manifest& m) {
    cmd->add_option("--metric", m.metric, "pair metric: f | l")
        ->check(CLI::IsMember({"f", "l"}));
    cmd->add_option("--min-match-size", m.min_match_size,
                    "smallest cluster offered to the matcher");
    cmd->add_option("--conjunctive", m.conjunctive,
                    "category pair for conjunctive divisions, e.g. gender,nation "
                    "(default: the two categories with fewest classes)");
}

void add_render_options(CLI::App* cmd, Manifest& m) {
    cmd->add_option("--display-size-threshold", m.display_size_threshold,
                    "only draw clusters with more members than this");
    cmd->add_option("--min-display", m.min_display,
                    "annotate matches scoring at least this");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical cluster-class matching over embedding sets"};
    app.require_subcommand(1);

    Manifest m;
    std::string hierarchy_file, report_file;

    auto* synth = app.add_subcommand("synth", "generate a nested synthetic embedding set");
    synth->add_option("--out-dir", m.out_dir, "output directory");
    synth->add_option("--seed", m.synth.seed, "rng seed");
    synth->add_option("--genders", m.synth.genders, "gender class count");
    synth->add_option("--nations", m.synth.nations, "nation classes per gender");
    synth->add_option("--identities", m.synth.identities, "identities per gender x nation cell");
    synth->add_option("--points-per-identity", m.synth.points_per_identity, "points per identity");
    synth->add_option("--dim", m.synth.dim, "embedding dimension (>= 3)");
    synth->add_option("--sep-gender", m.synth.sep_gender, "gender center spacing");
    synth->add_option("--sep-nation", m.synth.sep_nation, "nation center spacing");
    synth->add_option("--sep-identity", m.synth.sep_identity, "identity center spacing");
    synth->add_option("--radius", m.synth.radius, "identity ball radius");
    synth->add_flag("--allow-overlap", m.synth.allow_overlap,
                    "skip the separation guarantee check");

    auto* cluster = app.add_subcommand("cluster", "build hierarchies for each min_pts");
    add_io_options(cluster, m, false);
    add_cluster_options(cluster, m);
    cluster->add_flag("--dump-matrices", m.dump_matrices, "also write DMX1 distance matrices");

    auto* evaluate = app.add_subcommand("evaluate", "CCM degrees per (min_pts, category, metric)");
    add_io_options(evaluate, m, true);
    add_cluster_options(evaluate, m);
    evaluate->add_option("--min-match-size", m.min_match_size,
                         "smallest cluster offered to the matcher");

    auto* interpret = app.add_subcommand("interpret", "greedy one-to-one cluster-class matching");
    add_io_options(interpret, m, true);
    add_cluster_options(interpret, m);
    add_match_options(interpret, m);
    interpret->add_flag("--render", m.render, "also render the annotated dendrogram");
    add_render_options(interpret, m);

    auto* render = app.add_subcommand("render", "render a stored hierarchy + match report");
    render->add_option("--hierarchy", hierarchy_file, "hierarchy JSON from cluster/pipeline")
        ->required();
    render->add_option("--report", report_file, "match report JSON from interpret/pipeline")
        ->required();
    render->add_option("--out-dir", m.out_dir, "output directory");
    add_render_options(render, m);

    auto* pipeline = app.add_subcommand("pipeline", "cluster + evaluate + interpret + render");
    add_io_options(pipeline, m, true);
    add_cluster_options(pipeline, m);
    add_match_options(pipeline, m);
    add_render_options(pipeline, m);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    // interpret builds one hierarchy, so its min_pts defaults to plain
    // single linkage rather than the sweep.
    if (interpret->parsed() && interpret->get_option("--min-pts")->count() == 0)
        m.min_pts = {0};

    try {
        if (synth->parsed()) return cmd_synth(m);
        if (cluster->parsed()) return cmd_cluster(m);
        if (evaluate->parsed()) return cmd_evaluate(m);
        if (interpret->parsed()) return cmd_interpret(m);
        if (render->parsed()) return cmd_render(m, hierarchy_file, report_file);
        if (pipeline->parsed()) return cmd_pipeline(m);
        return 2;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
