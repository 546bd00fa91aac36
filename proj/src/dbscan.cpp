#include "dendromatch/dbscan.hpp"

#include <stdexcept>
#include <vector>

namespace dendromatch {

FlatPartition dbscan_flat(const DistanceMatrix& base, double eps, int min_pts) {
    if (base.tag() != MetricTag::base)
        throw std::invalid_argument("dbscan_flat expects a base-metric matrix");
    if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
    if (min_pts < 0) throw std::invalid_argument("min_pts must be >= 0");

    const std::size_t n = base.size();
    std::vector<bool> core(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        int neighbours = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && base(i, j) <= eps) ++neighbours;
        core[i] = neighbours >= min_pts;
    }

    FlatPartition part;
    part.assignment.assign(n, kNoise);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i] || part.assignment[i] != kNoise) continue;
        const int cluster = part.cluster_count++;
        part.assignment[i] = cluster;
        stack.assign(1, i);
        while (!stack.empty()) {
            std::size_t p = stack.back();
            stack.pop_back();
            for (std::size_t q = 0; q < n; ++q) {
                if (!core[q] || part.assignment[q] != kNoise) continue;
                if (base(p, q) <= eps) {
                    part.assignment[q] = cluster;
                    stack.push_back(q);
                }
            }
        }
    }
    return part;
}

}  // namespace dendromatch
