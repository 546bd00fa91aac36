#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dendromatch/dbscan.hpp"
#include "dendromatch/metric_space.hpp"

namespace dendromatch {

struct MstEdge {
    std::uint32_t u;  // u < v
    std::uint32_t v;
    double weight;
};

/// Spanning tree of the points, edges sorted by (weight, u, v).
struct MinimumSpanningTree {
    std::size_t n = 0;
    std::vector<MstEdge> edges;  // n-1 entries
};

struct LinkageMerge {
    std::uint32_t left;   // node id: points are 0..n-1, merges are n, n+1, ...
    std::uint32_t right;
    double height;
    std::uint32_t size;
};

/// Single-linkage merge sequence induced by processing MST edges in
/// ascending weight order. Heights are non-decreasing; the last merge has
/// size n.
struct LinkageTree {
    std::size_t n = 0;
    std::vector<LinkageMerge> merges;  // n-1 entries
};

/// Dense Prim growth, O(n^2). Tie-breaking is deterministic: among equal
/// frontier distances the edge with the smaller (min endpoint, max endpoint)
/// pair wins.
MinimumSpanningTree build_mst(const DistanceMatrix& d);

LinkageTree mst_to_linkage(const MinimumSpanningTree& mst);

/// Flat clustering at radius eps over an MST built in the mutual
/// reachability space: keep edges with weight <= eps, send points whose core
/// distance exceeds eps to noise, and read clusters off the remaining
/// connected components. Matches dbscan_flat on the base matrix exactly.
FlatPartition flat_cut(const MinimumSpanningTree& mst, const CoreDistances& core, double eps);

// CSV dump: header left,right,height,size then one merge per row.
void write_linkage_csv(const LinkageTree& link, const std::filesystem::path& path);

}  // namespace dendromatch
