#pragma once

#include <cstdint>
#include <string>

#include "dendromatch/hierarchy.hpp"
#include "dendromatch/matching.hpp"

namespace dendromatch {

/// Icicle-plot settings. The y-axis is lambda = 1/eps; eps = 0 (single
/// points, duplicate coordinates) is drawn at lambda_cap instead of
/// infinity.
struct RenderSpec {
    std::uint32_t display_size_threshold = 800;  // keep nodes with more members than this
    double min_display_score = 0.25;             // annotate pairs scoring at least this
    double lambda_cap = 0.0;  // <= 0 selects 1.05 x the largest finite lambda
    double width = 1200.0;
    double height = 800.0;
};

/// Static icicle dendrogram. Each retained node is drawn with width
/// proportional to its member count at every lambda; matched pairs at or
/// above the display threshold are labelled "<class> pre: X.XX" or
/// "rec: X.XX" after their limiting factor. Byte-deterministic.
std::string render_svg(const ClusterHierarchy& h, const MatchReport& report,
                       const RenderSpec& spec);

/// Machine-readable layout: per-node (lambda, width) step breakpoints plus
/// the annotation records, with stable key ordering.
std::string render_json(const ClusterHierarchy& h, const MatchReport& report,
                        const RenderSpec& spec);

}  // namespace dendromatch
