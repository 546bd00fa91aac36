#pragma once

#include <vector>

#include "dendromatch/metric_space.hpp"

namespace dendromatch {

inline constexpr int kNoise = -1;

/// One flat clustering: assignment[i] is a cluster id or kNoise. Cluster ids
/// are consecutive from 0, assigned in order of each cluster's smallest
/// member index.
struct FlatPartition {
    std::vector<int> assignment;
    int cluster_count = 0;
};

/// Reference flat DBSCAN, core-points-only variant: point i is core iff it
/// has at least min_pts other points within eps; clusters are the connected
/// components of core points under the <= eps relation; everything else is
/// noise. Deliberately simple -- this is the oracle the MST cut is checked
/// against.
FlatPartition dbscan_flat(const DistanceMatrix& base, double eps, int min_pts);

}  // namespace dendromatch
