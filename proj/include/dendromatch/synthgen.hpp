#pragma once

#include <cstdint>

#include "dendromatch/embedding_io.hpp"

namespace dendromatch {

/// Nested synthetic data: gender blobs contain nation blobs contain identity
/// balls. Labels nest the same way (each nation class lives inside exactly
/// one gender, each identity inside one gender x nation cell), so every
/// category's divisions appear verbatim in a single-linkage hierarchy once
/// the separations are large enough. Points are uniform in a ball of radius
/// `radius` around their identity center, which makes the separation
/// guarantee exact rather than probabilistic.
struct SynthConfig {
    std::uint32_t genders = 2;
    std::uint32_t nations = 3;     // per gender
    std::uint32_t identities = 2;  // per gender x nation cell
    std::uint32_t points_per_identity = 20;
    std::uint32_t dim = 3;
    double sep_gender = 48.0;
    double sep_nation = 16.0;
    double sep_identity = 4.0;
    double radius = 0.5;
    std::uint64_t seed = 1;
    bool allow_overlap = false;
};

struct SynthResult {
    EmbeddingSet embeddings;
    LabelTable labels;
};

/// Throws unless the worst-case blob diameters stay below the center
/// separations at every level (the single-linkage exact-recovery condition),
/// or cfg.allow_overlap is set.
void validate_config(const SynthConfig& cfg);

SynthResult generate(const SynthConfig& cfg);

}  // namespace dendromatch
