#include "dendromatch/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "dendromatch/errors.hpp"

namespace dendromatch {

DistanceMatrix pairwise_distance(const EmbeddingSet& set) {
    const std::size_t n = set.n;
    DistanceMatrix out(n, MetricTag::base);
    for (std::size_t i = 0; i < n; ++i) {
        auto ri = set.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            auto rj = set.row(j);
            double sum = 0.0;
            for (std::size_t k = 0; k < set.d; ++k) {
                double diff = ri[k] - rj[k];
                sum += diff * diff;
            }
            double dist = std::sqrt(sum);
            if (!std::isfinite(dist))
                throw InputError("distance overflow between points " + std::to_string(i) +
                                 " and " + std::to_string(j));
            out.set(i, j, dist);
        }
    }
    return out;
}

CoreDistances core_distances(const DistanceMatrix& base, int min_pts) {
    if (base.tag() != MetricTag::base)
        throw std::invalid_argument("core_distances expects a base-metric matrix");
    const std::size_t n = base.size();
    if (n == 0) throw std::invalid_argument("empty distance matrix");
    if (min_pts < 0) throw std::invalid_argument("min_pts must be >= 0");
    if (static_cast<std::size_t>(min_pts) > n - 1)
        throw std::invalid_argument("min_pts " + std::to_string(min_pts) +
                                    " exceeds n-1 = " + std::to_string(n - 1));

    CoreDistances core;
    core.min_pts = min_pts;
    core.values.assign(n, 0.0);
    if (min_pts == 0) return core;

    std::vector<double> row(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t m = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) row[m++] = base(i, j);
        // The min_pts-th nearest other point (1-based).
        std::nth_element(row.begin(), row.begin() + (min_pts - 1), row.end());
        core.values[i] = row[min_pts - 1];
    }
    return core;
}

DistanceMatrix mutual_reachability(const DistanceMatrix& base, const CoreDistances& core) {
    if (base.tag() != MetricTag::base)
        throw std::invalid_argument("mutual_reachability expects a base-metric matrix");
    const std::size_t n = base.size();
    if (core.values.size() != n)
        throw std::invalid_argument("core distance vector size mismatch");

    DistanceMatrix out(n, MetricTag::mutual_reachability, core.min_pts);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            out.set(i, j, std::max({core.values[i], core.values[j], base(i, j)}));
    return out;
}

void write_matrix(const DistanceMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path.string());
    out.write("DMX1", 4);
    std::uint32_t n = static_cast<std::uint32_t>(m.size());
    char b[4] = {char(n & 0xff), char((n >> 8) & 0xff), char((n >> 16) & 0xff),
                 char((n >> 24) & 0xff)};
    out.write(b, 4);
    out.write(reinterpret_cast<const char*>(m.values().data()),
              static_cast<std::streamsize>(m.values().size() * sizeof(double)));
}

DistanceMatrix read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "DMX1", 4) != 0)
        throw InputError(path.string() + ": bad magic, expected DMX1");
    unsigned char nb[4];
    in.read(reinterpret_cast<char*>(nb), 4);
    if (!in) throw InputError(path.string() + ": truncated header");
    std::uint32_t n = std::uint32_t(nb[0]) | std::uint32_t(nb[1]) << 8 |
                      std::uint32_t(nb[2]) << 16 | std::uint32_t(nb[3]) << 24;
    DistanceMatrix m(n, MetricTag::base);
    std::vector<double> vals(std::size_t(n) * n);
    in.read(reinterpret_cast<char*>(vals.data()),
            static_cast<std::streamsize>(vals.size() * sizeof(double)));
    if (!in) throw InputError(path.string() + ": truncated payload");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (vals[i * n + j] != vals[j * n + i] || (i == j && vals[i * n + j] != 0.0))
                throw InputError(path.string() + ": matrix is not symmetric with zero diagonal");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, vals[i * n + j]);
    return m;
}

}  // namespace dendromatch
