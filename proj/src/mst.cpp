#include "dendromatch/mst.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dendromatch/errors.hpp"
#include "internal/text.hpp"

namespace dendromatch {

namespace {

struct DisjointSet {
    std::vector<std::uint32_t> parent;

    explicit DisjointSet(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0u);
    }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];  // path halving
            x = parent[x];
        }
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) { parent[find(a)] = find(b); }
};

// (weight, min endpoint, max endpoint) ordering shared by Prim tie-breaking
// and the final edge sort.
bool edge_less(const MstEdge& a, const MstEdge& b) {
    if (a.weight != b.weight) return a.weight < b.weight;
    if (a.u != b.u) return a.u < b.u;
    return a.v < b.v;
}

MstEdge make_edge(std::uint32_t a, std::uint32_t b, double w) {
    return {std::min(a, b), std::max(a, b), w};
}

}  // namespace

MinimumSpanningTree build_mst(const DistanceMatrix& d) {
    const std::size_t n = d.size();
    if (n == 0) throw std::invalid_argument("cannot build MST over zero points");

    MinimumSpanningTree mst;
    mst.n = n;
    if (n == 1) return mst;

    std::vector<bool> in_tree(n, false);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<std::uint32_t> best_from(n, 0);

    in_tree[0] = true;
    for (std::size_t j = 1; j < n; ++j) {
        best[j] = d(0, j);
        best_from[j] = 0;
    }

    mst.edges.reserve(n - 1);
    for (std::size_t round = 1; round < n; ++round) {
        std::size_t pick = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (in_tree[j]) continue;
            if (pick == n) {
                pick = j;
                continue;
            }
            MstEdge cand = make_edge(best_from[j], static_cast<std::uint32_t>(j), best[j]);
            MstEdge cur = make_edge(best_from[pick], static_cast<std::uint32_t>(pick), best[pick]);
            if (edge_less(cand, cur)) pick = j;
        }
        mst.edges.push_back(
            make_edge(best_from[pick], static_cast<std::uint32_t>(pick), best[pick]));
        in_tree[pick] = true;
        for (std::size_t j = 0; j < n; ++j) {
            if (in_tree[j]) continue;
            double w = d(pick, j);
            if (w < best[j]) {
                best[j] = w;
                best_from[j] = static_cast<std::uint32_t>(pick);
            } else if (w == best[j]) {
                MstEdge cand = make_edge(static_cast<std::uint32_t>(pick),
                                         static_cast<std::uint32_t>(j), w);
                MstEdge cur = make_edge(best_from[j], static_cast<std::uint32_t>(j), w);
                if (edge_less(cand, cur)) best_from[j] = static_cast<std::uint32_t>(pick);
            }
        }
    }

    std::sort(mst.edges.begin(), mst.edges.end(), edge_less);
    return mst;
}

LinkageTree mst_to_linkage(const MinimumSpanningTree& mst) {
    const std::size_t n = mst.n;
    if (n == 0) throw std::invalid_argument("empty MST");
    if (mst.edges.size() != n - 1) throw std::invalid_argument("MST edge count != n-1");

    LinkageTree link;
    link.n = n;
    link.merges.reserve(n - 1);

    DisjointSet ds(n);
    // Current linkage node id and size of each component, indexed by root.
    std::vector<std::uint32_t> node_of(n), size_of(n, 1);
    std::iota(node_of.begin(), node_of.end(), 0u);

    std::uint32_t next_node = static_cast<std::uint32_t>(n);
    for (const auto& e : mst.edges) {
        std::uint32_t ru = ds.find(e.u);
        std::uint32_t rv = ds.find(e.v);
        if (ru == rv) throw std::invalid_argument("MST edges contain a cycle");
        LinkageMerge m{node_of[ru], node_of[rv], e.weight, size_of[ru] + size_of[rv]};
        link.merges.push_back(m);
        ds.unite(ru, rv);
        std::uint32_t r = ds.find(ru);
        node_of[r] = next_node++;
        size_of[r] = m.size;
    }
    return link;
}

FlatPartition flat_cut(const MinimumSpanningTree& mst, const CoreDistances& core, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
    const std::size_t n = mst.n;
    if (core.values.size() != n) throw std::invalid_argument("core distance size mismatch");

    std::vector<bool> keep(n);
    for (std::size_t i = 0; i < n; ++i) keep[i] = core.values[i] <= eps;

    DisjointSet ds(n);
    for (const auto& e : mst.edges) {
        if (e.weight > eps) continue;
        // An edge incident to a dropped point always weighs more than eps in
        // the mutual reachability space, so this never links noise.
        if (!keep[e.u] || !keep[e.v]) continue;
        ds.unite(e.u, e.v);
    }

    FlatPartition part;
    part.assignment.assign(n, kNoise);
    std::vector<int> id_of_root(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (!keep[i]) continue;
        std::uint32_t r = ds.find(static_cast<std::uint32_t>(i));
        if (id_of_root[r] < 0) id_of_root[r] = part.cluster_count++;
        part.assignment[i] = id_of_root[r];
    }
    return part;
}

void write_linkage_csv(const LinkageTree& link, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path.string());
    out << "left,right,height,size\n";
    for (const auto& m : link.merges)
        out << m.left << ',' << m.right << ',' << detail::format_double(m.height) << ','
            << m.size << "\n";
}

}  // namespace dendromatch
