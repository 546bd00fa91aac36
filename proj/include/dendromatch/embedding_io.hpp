#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dendromatch {

/// A set of n points in d-dimensional space, each with a unique string id.
/// Row i of `data` belongs to ids[i]; every coordinate is finite.
struct EmbeddingSet {
    std::vector<std::string> ids;
    std::vector<double> data;  // n*d, row-major
    std::size_t n = 0;
    std::size_t d = 0;

    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * d, d};
    }
    double at(std::size_t i, std::size_t j) const { return data[i * d + j]; }
};

/// Per-point categorical labels. One class name per (row, category); rows are
/// keyed by id and aligned to an EmbeddingSet by id, never by position.
struct LabelTable {
    std::vector<std::string> categories;
    std::vector<std::string> ids;
    // columns[c][r] is the class of row r under categories[c], trimmed.
    std::vector<std::vector<std::string>> columns;

    std::size_t rows() const { return ids.size(); }
};

enum class DivisionKind { individual, conjunctive };

/// The index set of all points carrying one class label (or, for conjunctive
/// divisions, two labels from different categories simultaneously).
struct ClassDivision {
    std::string name;
    DivisionKind kind = DivisionKind::individual;
    std::vector<std::uint32_t> members;  // sorted ascending
};

enum class EmbeddingFormat { csv, raw_binary };

EmbeddingSet load_embeddings(const std::filesystem::path& path, EmbeddingFormat format,
                             const std::filesystem::path& ids_path = {});
EmbeddingSet load_embeddings_csv(const std::filesystem::path& path);
// Raw layout: magic "EMB1", u32 n, u32 d (little-endian), n*d float32
// row-major. Ids live in a sidecar text file, one per line.
EmbeddingSet load_embeddings_raw(const std::filesystem::path& path,
                                 const std::filesystem::path& ids_path);

void write_embeddings_csv(const EmbeddingSet& set, const std::filesystem::path& path);
void write_embeddings_raw(const EmbeddingSet& set, const std::filesystem::path& path,
                          const std::filesystem::path& ids_path);

LabelTable load_labels(const std::filesystem::path& path);
void write_labels_csv(const LabelTable& table, const std::filesystem::path& path);

/// Partition [0, set.n) into one division per distinct class of `category`,
/// ordered by class name, members sorted. Alignment is by id.
std::vector<ClassDivision> divisions_from_labels(const LabelTable& table,
                                                 const EmbeddingSet& set,
                                                 const std::string& category);

}  // namespace dendromatch
