#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dendromatch/embedding_io.hpp"

namespace dendromatch {

enum class MetricTag { base, mutual_reachability };

/// Dense symmetric n x n distance matrix with zero diagonal.
class DistanceMatrix {
public:
    DistanceMatrix(std::size_t n, MetricTag tag, int min_pts = -1)
        : n_(n), tag_(tag), min_pts_(min_pts), vals_(n * n, 0.0) {}

    std::size_t size() const { return n_; }
    MetricTag tag() const { return tag_; }
    int min_pts() const { return min_pts_; }

    double operator()(std::size_t i, std::size_t j) const { return vals_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double v) {
        vals_[i * n_ + j] = v;
        vals_[j * n_ + i] = v;
    }
    const std::vector<double>& values() const { return vals_; }

private:
    std::size_t n_;
    MetricTag tag_;
    int min_pts_;
    std::vector<double> vals_;
};

/// core[i] = distance from point i to its min_pts-th nearest other point;
/// all zeros when min_pts = 0.
struct CoreDistances {
    std::vector<double> values;
    int min_pts = 0;
};

DistanceMatrix pairwise_distance(const EmbeddingSet& set);
CoreDistances core_distances(const DistanceMatrix& base, int min_pts);
DistanceMatrix mutual_reachability(const DistanceMatrix& base, const CoreDistances& core);

// Debugging dump: magic "DMX1", u32 n, then n*n float64 row-major,
// little-endian.
void write_matrix(const DistanceMatrix& m, const std::filesystem::path& path);
DistanceMatrix read_matrix(const std::filesystem::path& path);

}  // namespace dendromatch
