#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dendromatch/dbscan.hpp"
#include "dendromatch/dendrogram.hpp"
#include "dendromatch/embedding_io.hpp"
#include "dendromatch/hierarchy.hpp"
#include "dendromatch/matching.hpp"
#include "dendromatch/metric_space.hpp"
#include "dendromatch/mst.hpp"
#include "dendromatch/synthgen.hpp"

namespace py = pybind11;
using namespace dendromatch;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

EmbeddingSet set_from_array(const DoubleArray& data) {
    auto buf = data.request();
    if (buf.ndim != 2) throw std::invalid_argument("embeddings must be a 2-D array");
    EmbeddingSet set;
    set.n = static_cast<std::size_t>(buf.shape[0]);
    set.d = static_cast<std::size_t>(buf.shape[1]);
    const double* ptr = static_cast<const double*>(buf.ptr);
    set.data.assign(ptr, ptr + set.n * set.d);
    for (std::size_t i = 0; i < set.n; ++i) set.ids.push_back("p" + std::to_string(i));
    return set;
}

DistanceMatrix matrix_from_array(const DoubleArray& arr, MetricTag tag, int min_pts = -1) {
    auto buf = arr.request();
    if (buf.ndim != 2 || buf.shape[0] != buf.shape[1])
        throw std::invalid_argument("distance matrix must be square");
    const auto n = static_cast<std::size_t>(buf.shape[0]);
    const double* ptr = static_cast<const double*>(buf.ptr);
    DistanceMatrix m(n, tag, min_pts);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, ptr[i * n + j]);
    return m;
}

py::array_t<double> matrix_to_array(const DistanceMatrix& m) {
    const auto n = static_cast<py::ssize_t>(m.size());
    py::array_t<double> out({n, n});
    std::copy(m.values().begin(), m.values().end(), out.mutable_data());
    return out;
}

std::vector<std::uint32_t> sorted_members(std::vector<std::uint32_t> members) {
    std::sort(members.begin(), members.end());
    return members;
}

std::vector<ClassDivision> divisions_from_pairs(
    const std::vector<std::pair<std::string, std::vector<std::uint32_t>>>& raw,
    DivisionKind kind) {
    std::vector<ClassDivision> out;
    for (const auto& [name, members] : raw)
        out.push_back({name, kind, sorted_members(members)});
    return out;
}

// Keeps the span-backed MatchableCluster list alive alongside its storage.
struct ClusterArena {
    std::vector<std::vector<std::uint32_t>> storage;
    std::vector<MatchableCluster> clusters;
};

ClusterArena clusters_from_pairs(
    const std::vector<std::pair<std::uint32_t, std::vector<std::uint32_t>>>& raw) {
    ClusterArena arena;
    arena.storage.reserve(raw.size());
    for (const auto& [id, members] : raw) arena.storage.push_back(sorted_members(members));
    for (std::size_t i = 0; i < raw.size(); ++i)
        arena.clusters.push_back({raw[i].first, arena.storage[i]});
    return arena;
}

py::dict score_to_dict(const PairScore& s) {
    py::dict out;
    out["precision"] = s.precision;
    out["recall"] = s.recall;
    out["f_score"] = s.f_score;
    out["l_score"] = s.l_score;
    out["limiting_factor"] = to_string(s.limiting_factor);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "hierarchical cluster-class matching core";

    m.def(
        "pairwise_distance",
        [](const DoubleArray& data) { return matrix_to_array(pairwise_distance(set_from_array(data))); },
        py::arg("data"), "Euclidean distance matrix of the embedding rows.");

    m.def(
        "core_distances",
        [](const DoubleArray& dist, int min_pts) {
            auto core = core_distances(matrix_from_array(dist, MetricTag::base), min_pts);
            return py::array_t<double>(py::cast(core.values));
        },
        py::arg("dist"), py::arg("min_pts"),
        "Distance to each point's min_pts-th nearest other point.");

    m.def(
        "mutual_reachability",
        [](const DoubleArray& dist, const DoubleArray& core, int min_pts) {
            CoreDistances cd;
            cd.min_pts = min_pts;
            auto buf = core.request();
            const double* ptr = static_cast<const double*>(buf.ptr);
            cd.values.assign(ptr, ptr + buf.size);
            return matrix_to_array(
                mutual_reachability(matrix_from_array(dist, MetricTag::base), cd));
        },
        py::arg("dist"), py::arg("core"), py::arg("min_pts") = 0);

    m.def(
        "dbscan_flat",
        [](const DoubleArray& dist, double eps, int min_pts) {
            auto part = dbscan_flat(matrix_from_array(dist, MetricTag::base), eps, min_pts);
            return py::array_t<int>(py::cast(part.assignment));
        },
        py::arg("dist"), py::arg("eps"), py::arg("min_pts"),
        "Reference flat DBSCAN labels; -1 marks noise.");

    m.def(
        "build_mst",
        [](const DoubleArray& dist, int min_pts) {
            auto mst = build_mst(matrix_from_array(
                dist, min_pts >= 0 ? MetricTag::mutual_reachability : MetricTag::base,
                min_pts));
            py::array_t<double> out({static_cast<py::ssize_t>(mst.edges.size()),
                                     static_cast<py::ssize_t>(3)});
            auto view = out.mutable_unchecked<2>();
            for (std::size_t i = 0; i < mst.edges.size(); ++i) {
                view(i, 0) = mst.edges[i].u;
                view(i, 1) = mst.edges[i].v;
                view(i, 2) = mst.edges[i].weight;
            }
            return out;
        },
        py::arg("dist"), py::arg("min_pts") = -1,
        "Edges (u, v, weight) sorted by (weight, u, v).");

    m.def(
        "flat_cut",
        [](const DoubleArray& mst_edges, const DoubleArray& core, double eps, int min_pts) {
            auto ebuf = mst_edges.request();
            if (ebuf.ndim != 2 || ebuf.shape[1] != 3)
                throw std::invalid_argument("mst_edges must be (n-1) x 3");
            auto cbuf = core.request();
            MinimumSpanningTree mst;
            mst.n = static_cast<std::size_t>(cbuf.size);
            const double* eptr = static_cast<const double*>(ebuf.ptr);
            for (py::ssize_t i = 0; i < ebuf.shape[0]; ++i)
                mst.edges.push_back({static_cast<std::uint32_t>(eptr[i * 3]),
                                     static_cast<std::uint32_t>(eptr[i * 3 + 1]),
                                     eptr[i * 3 + 2]});
            CoreDistances cd;
            cd.min_pts = min_pts;
            const double* cptr = static_cast<const double*>(cbuf.ptr);
            cd.values.assign(cptr, cptr + cbuf.size);
            auto part = flat_cut(mst, cd, eps);
            return py::array_t<int>(py::cast(part.assignment));
        },
        py::arg("mst_edges"), py::arg("core"), py::arg("eps"), py::arg("min_pts") = 0);

    m.def(
        "build_hierarchy_json",
        [](const DoubleArray& data, int min_pts, std::uint32_t min_cluster_size,
           bool emit_members) {
            auto set = set_from_array(data);
            auto base = pairwise_distance(set);
            auto core = core_distances(base, min_pts);
            auto mst = build_mst(mutual_reachability(base, core));
            auto h = build_hierarchy(mst_to_linkage(mst), min_cluster_size);
            return hierarchy_to_json(h, emit_members, min_pts);
        },
        py::arg("data"), py::arg("min_pts") = 0, py::arg("min_cluster_size") = 1,
        py::arg("emit_members") = true,
        "Full clustering stage: embeddings to condensed-hierarchy JSON.");

    m.def(
        "pair_score",
        [](std::vector<std::uint32_t> c, std::vector<std::uint32_t> k) {
            return score_to_dict(pair_score(sorted_members(std::move(c)),
                                            sorted_members(std::move(k))));
        },
        py::arg("class_members"), py::arg("cluster_members"));

    m.def(
        "ccm_overall",
        [](const std::vector<std::pair<std::string, std::vector<std::uint32_t>>>& divisions,
           const std::vector<std::pair<std::uint32_t, std::vector<std::uint32_t>>>& clusters,
           const std::string& metric) {
            auto divs = divisions_from_pairs(divisions, DivisionKind::individual);
            auto arena = clusters_from_pairs(clusters);
            return ccm_overall(divs, arena.clusters, metric_from_string(metric));
        },
        py::arg("divisions"), py::arg("clusters"), py::arg("metric") = "f");

    m.def(
        "conjunctive_divisions",
        [](const std::vector<std::pair<std::string, std::vector<std::uint32_t>>>& a,
           const std::vector<std::pair<std::string, std::vector<std::uint32_t>>>& b) {
            auto conj = conjunctive_divisions(divisions_from_pairs(a, DivisionKind::individual),
                                              divisions_from_pairs(b, DivisionKind::individual));
            std::vector<std::pair<std::string, std::vector<std::uint32_t>>> out;
            for (auto& c : conj) out.emplace_back(c.name, std::move(c.members));
            return out;
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "hccm_match",
        [](const std::vector<std::pair<std::string, std::vector<std::uint32_t>>>& individual,
           const std::vector<std::pair<std::string, std::vector<std::uint32_t>>>& conjunctive,
           const std::vector<std::pair<std::uint32_t, std::vector<std::uint32_t>>>& clusters,
           const std::string& metric) {
            auto pool = divisions_from_pairs(individual, DivisionKind::individual);
            auto conj = divisions_from_pairs(conjunctive, DivisionKind::conjunctive);
            pool.insert(pool.end(), conj.begin(), conj.end());
            auto arena = clusters_from_pairs(clusters);
            return report_to_json(hccm_match(pool, arena.clusters, metric_from_string(metric)));
        },
        py::arg("individual"), py::arg("conjunctive"), py::arg("clusters"),
        py::arg("metric") = "l", "Greedy one-to-one matching; returns the report as JSON.");

    m.def(
        "render_svg",
        [](const std::string& hierarchy_json, const std::string& report_json,
           std::uint32_t display_size_threshold, double min_display) {
            RenderSpec spec;
            spec.display_size_threshold = display_size_threshold;
            spec.min_display_score = min_display;
            return render_svg(hierarchy_from_json(hierarchy_json),
                              report_from_json(report_json), spec);
        },
        py::arg("hierarchy_json"), py::arg("report_json"),
        py::arg("display_size_threshold") = 800, py::arg("min_display") = 0.25);

    m.def(
        "render_layout_json",
        [](const std::string& hierarchy_json, const std::string& report_json,
           std::uint32_t display_size_threshold, double min_display) {
            RenderSpec spec;
            spec.display_size_threshold = display_size_threshold;
            spec.min_display_score = min_display;
            return render_json(hierarchy_from_json(hierarchy_json),
                               report_from_json(report_json), spec);
        },
        py::arg("hierarchy_json"), py::arg("report_json"),
        py::arg("display_size_threshold") = 800, py::arg("min_display") = 0.25);

    m.def(
        "generate_synthetic",
        [](std::uint32_t genders, std::uint32_t nations, std::uint32_t identities,
           std::uint32_t points_per_identity, std::uint32_t dim, double sep_gender,
           double sep_nation, double sep_identity, double radius, std::uint64_t seed,
           bool allow_overlap) {
            SynthConfig cfg;
            cfg.genders = genders;
            cfg.nations = nations;
            cfg.identities = identities;
            cfg.points_per_identity = points_per_identity;
            cfg.dim = dim;
            cfg.sep_gender = sep_gender;
            cfg.sep_nation = sep_nation;
            cfg.sep_identity = sep_identity;
            cfg.radius = radius;
            cfg.seed = seed;
            cfg.allow_overlap = allow_overlap;
            auto result = generate(cfg);

            py::array_t<double> data({static_cast<py::ssize_t>(result.embeddings.n),
                                      static_cast<py::ssize_t>(result.embeddings.d)});
            std::copy(result.embeddings.data.begin(), result.embeddings.data.end(),
                      data.mutable_data());
            py::dict labels;
            for (std::size_t c = 0; c < result.labels.categories.size(); ++c)
                labels[result.labels.categories[c].c_str()] = result.labels.columns[c];
            py::dict out;
            out["ids"] = result.embeddings.ids;
            out["data"] = data;
            out["labels"] = labels;
            return out;
        },
        py::arg("genders") = 2, py::arg("nations") = 3, py::arg("identities") = 2,
        py::arg("points_per_identity") = 20, py::arg("dim") = 3, py::arg("sep_gender") = 48.0,
        py::arg("sep_nation") = 16.0, py::arg("sep_identity") = 4.0, py::arg("radius") = 0.5,
        py::arg("seed") = 1, py::arg("allow_overlap") = false);
}
