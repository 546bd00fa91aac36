#include "dendromatch/synthgen.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dendromatch {

namespace {

// Counter-based stream: state advances by a fixed constant, the mix is
// stateless, so a given seed always produces the same sequence on every
// platform.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    double uniform() {  // [0, 1)
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Box-Muller; consumes two uniforms per pair.
    void gaussian_pair(double& a, double& b) {
        double u1 = uniform(), u2 = uniform();
        while (u1 == 0.0) u1 = uniform();
        double mag = std::sqrt(-2.0 * std::log(u1));
        a = mag * std::cos(2.0 * M_PI * u2);
        b = mag * std::sin(2.0 * M_PI * u2);
    }
};

// Uniform draw from the d-ball of the given radius.
void sample_in_ball(SplitMix64& rng, double radius, std::size_t d, double* out) {
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < d; i += 2) {
        double a, b;
        rng.gaussian_pair(a, b);
        out[i] = a;
        norm_sq += a * a;
        if (i + 1 < d) {
            out[i + 1] = b;
            norm_sq += b * b;
        }
    }
    double norm = std::sqrt(norm_sq);
    if (norm == 0.0) norm = 1.0;
    double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    for (std::size_t i = 0; i < d; ++i) out[i] = out[i] / norm * r;
}

}  // namespace

void validate_config(const SynthConfig& cfg) {
    if (cfg.genders == 0 || cfg.nations == 0 || cfg.identities == 0 ||
        cfg.points_per_identity == 0)
        throw std::invalid_argument("all class counts and points_per_identity must be >= 1");
    if (cfg.dim < 3)
        throw std::invalid_argument("dim must be >= 3 (one offset axis per level)");
    if (cfg.radius <= 0.0 || cfg.sep_identity <= 0.0 || cfg.sep_nation <= 0.0 ||
        cfg.sep_gender <= 0.0)
        throw std::invalid_argument("radius and separations must be positive");
    if (!(cfg.sep_gender > cfg.sep_nation && cfg.sep_nation > cfg.sep_identity &&
          cfg.sep_identity > cfg.radius))
        throw std::invalid_argument(
            "separations must satisfy sep_gender > sep_nation > sep_identity > radius");
    if (cfg.allow_overlap) return;

    // Exact-recovery condition: at every level, the minimum center
    // separation must exceed the worst-case blob diameter at that level plus
    // one ball diameter on each side.
    const double r2 = 2.0 * cfg.radius;
    const double identity_diam = r2;
    const double nation_diam = (cfg.identities - 1) * cfg.sep_identity + r2;
    const double gender_diam =
        (cfg.nations - 1) * cfg.sep_nation + (cfg.identities - 1) * cfg.sep_identity + r2;
    auto fail = [](const std::string& what) {
        throw std::invalid_argument("separation guarantee violated (" + what +
                                    "); pass allow_overlap to generate anyway");
    };
    if (!(cfg.sep_identity > identity_diam + r2)) fail("identity level");
    if (!(cfg.sep_nation > nation_diam + r2)) fail("nation level");
    if (!(cfg.sep_gender > gender_diam + r2)) fail("gender level");
}

SynthResult generate(const SynthConfig& cfg) {
    validate_config(cfg);
    const std::size_t n = std::size_t(cfg.genders) * cfg.nations * cfg.identities *
                          cfg.points_per_identity;
    const std::size_t d = cfg.dim;

    SynthResult out;
    out.embeddings.n = n;
    out.embeddings.d = d;
    out.embeddings.data.resize(n * d);
    out.embeddings.ids.reserve(n);
    out.labels.categories = {"gender", "nation", "identity"};
    out.labels.columns.resize(3);

    SplitMix64 rng(cfg.seed);
    std::vector<double> offset(d);
    std::size_t row = 0;
    for (std::uint32_t g = 0; g < cfg.genders; ++g) {
        const std::string gender = "g" + std::to_string(g);
        for (std::uint32_t nat = 0; nat < cfg.nations; ++nat) {
            const std::string nation = gender + ".n" + std::to_string(nat);
            for (std::uint32_t ident = 0; ident < cfg.identities; ++ident) {
                const std::string identity = nation + ".s" + std::to_string(ident);
                for (std::uint32_t p = 0; p < cfg.points_per_identity; ++p, ++row) {
                    sample_in_ball(rng, cfg.radius, d, offset.data());
                    double* dst = out.embeddings.data.data() + row * d;
                    for (std::size_t k = 0; k < d; ++k) dst[k] = offset[k];
                    dst[0] += g * cfg.sep_gender;
                    dst[1] += nat * cfg.sep_nation;
                    dst[2] += ident * cfg.sep_identity;

                    out.embeddings.ids.push_back(identity + ".p" + std::to_string(p));
                    out.labels.ids.push_back(out.embeddings.ids.back());
                    out.labels.columns[0].push_back(gender);
                    out.labels.columns[1].push_back(nation);
                    out.labels.columns[2].push_back(identity);
                }
            }
        }
    }
    return out;
}

}  // namespace dendromatch
