#include "dendromatch/embedding_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "dendromatch/errors.hpp"
#include "internal/text.hpp"

namespace dendromatch {

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::ifstream open_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path.string());
    return in;
}

// Strips a trailing '\r' so CRLF files parse the same as LF files.
bool get_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

void put_u32_le(std::ostream& out, std::uint32_t v) {
    char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
                 char((v >> 24) & 0xff)};
    out.write(b, 4);
}

std::uint32_t get_u32_le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw InputError("raw embedding file truncated in header");
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

void check_invariants(const EmbeddingSet& set) {
    if (set.n == 0 || set.d == 0) throw InputError("embedding set must have n >= 1 and d >= 1");
    std::unordered_set<std::string_view> seen;
    seen.reserve(set.n);
    for (std::size_t i = 0; i < set.n; ++i) {
        if (set.ids[i].empty()) throw InputError("empty id at row " + std::to_string(i + 1));
        if (!seen.insert(set.ids[i]).second)
            throw InputError("duplicate id '" + set.ids[i] + "'");
    }
}

}  // namespace

EmbeddingSet load_embeddings(const std::filesystem::path& path, EmbeddingFormat format,
                             const std::filesystem::path& ids_path) {
    if (format == EmbeddingFormat::csv) return load_embeddings_csv(path);
    return load_embeddings_raw(path, ids_path);
}

EmbeddingSet load_embeddings_csv(const std::filesystem::path& path) {
    auto in = open_text(path);
    std::string line;
    if (!get_line(in, line)) throw InputError(path.string() + ": missing header");

    auto header = split_csv_line(line);
    if (header.empty() || detail::trim(header[0]) != "id")
        throw InputError(path.string() + ": header must start with 'id'");
    const std::size_t d = header.size() - 1;
    if (d == 0) throw InputError(path.string() + ": no coordinate columns in header");
    for (std::size_t j = 0; j < d; ++j) {
        std::string expected = "dim" + std::to_string(j);
        if (detail::trim(header[j + 1]) != expected)
            throw InputError(path.string() + ": malformed header, expected column '" + expected +
                             "', got '" + std::string(detail::trim(header[j + 1])) + "'");
    }

    EmbeddingSet set;
    set.d = d;
    std::size_t row_no = 1;  // header was row 1
    while (get_line(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != d + 1)
            throw InputError(path.string() + ": row " + std::to_string(row_no) + " has " +
                             std::to_string(cells.size() - 1) + " coordinates, expected " +
                             std::to_string(d));
        set.ids.emplace_back(detail::trim(cells[0]));
        for (std::size_t j = 0; j < d; ++j) {
            double v;
            if (!detail::parse_double(detail::trim(cells[j + 1]), v))
                throw InputError(path.string() + ": row " + std::to_string(row_no) +
                                 ": unparsable coordinate '" + std::string(cells[j + 1]) + "'");
            if (!std::isfinite(v))
                throw InputError(path.string() + ": row " + std::to_string(row_no) +
                                 ": non-finite coordinate");
            set.data.push_back(v);
        }
    }
    set.n = set.ids.size();
    check_invariants(set);
    return set;
}

EmbeddingSet load_embeddings_raw(const std::filesystem::path& path,
                                 const std::filesystem::path& ids_path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "EMB1", 4) != 0)
        throw InputError(path.string() + ": bad magic, expected EMB1");
    EmbeddingSet set;
    set.n = get_u32_le(in);
    set.d = get_u32_le(in);
    set.data.resize(set.n * set.d);
    std::vector<float> buf(set.n * set.d);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!in) throw InputError(path.string() + ": truncated payload");
    for (std::size_t i = 0; i < buf.size(); ++i) {
        if (!std::isfinite(buf[i]))
            throw InputError(path.string() + ": non-finite value at row " +
                             std::to_string(i / set.d + 1));
        set.data[i] = static_cast<double>(buf[i]);
    }

    auto ids_in = open_text(ids_path);
    std::string line;
    while (get_line(ids_in, line)) {
        auto id = detail::trim(line);
        if (!id.empty()) set.ids.emplace_back(id);
    }
    if (set.ids.size() != set.n)
        throw InputError(ids_path.string() + ": " + std::to_string(set.ids.size()) +
                         " ids for " + std::to_string(set.n) + " rows");
    check_invariants(set);
    return set;
}

void write_embeddings_csv(const EmbeddingSet& set, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path.string());
    out << "id";
    for (std::size_t j = 0; j < set.d; ++j) out << ",dim" << j;
    out << "\n";
    for (std::size_t i = 0; i < set.n; ++i) {
        out << set.ids[i];
        for (double v : set.row(i)) out << ',' << detail::format_double(v);
        out << "\n";
    }
}

void write_embeddings_raw(const EmbeddingSet& set, const std::filesystem::path& path,
                          const std::filesystem::path& ids_path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path.string());
    out.write("EMB1", 4);
    put_u32_le(out, static_cast<std::uint32_t>(set.n));
    put_u32_le(out, static_cast<std::uint32_t>(set.d));
    std::vector<float> buf(set.data.begin(), set.data.end());
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));

    std::ofstream ids_out(ids_path);
    if (!ids_out) throw InputError("cannot write file: " + ids_path.string());
    for (const auto& id : set.ids) ids_out << id << "\n";
}

LabelTable load_labels(const std::filesystem::path& path) {
    auto in = open_text(path);
    std::string line;
    if (!get_line(in, line)) throw InputError(path.string() + ": missing header");
    auto header = split_csv_line(line);
    if (header.size() < 2 || detail::trim(header[0]) != "id")
        throw InputError(path.string() + ": header must be id,<category>,...");

    LabelTable table;
    std::unordered_set<std::string_view> cat_seen;
    for (std::size_t c = 1; c < header.size(); ++c) {
        auto name = detail::trim(header[c]);
        if (name.empty()) throw InputError(path.string() + ": empty category name in header");
        table.categories.emplace_back(name);
    }
    for (const auto& c : table.categories)
        if (!cat_seen.insert(c).second)
            throw InputError(path.string() + ": duplicate category '" + c + "'");
    table.columns.resize(table.categories.size());

    std::unordered_set<std::string_view> id_seen;
    std::size_t row_no = 1;
    while (get_line(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw InputError(path.string() + ": row " + std::to_string(row_no) +
                             " has wrong cell count");
        auto id = detail::trim(cells[0]);
        if (id.empty())
            throw InputError(path.string() + ": missing id at row " + std::to_string(row_no));
        table.ids.emplace_back(id);
        for (std::size_t c = 0; c < table.categories.size(); ++c) {
            auto cls = detail::trim(cells[c + 1]);
            if (cls.empty())
                throw InputError(path.string() + ": empty cell at row " + std::to_string(row_no) +
                                 ", category '" + table.categories[c] + "'");
            table.columns[c].emplace_back(cls);
        }
    }
    for (const auto& id : table.ids)
        if (!id_seen.insert(id).second)
            throw InputError(path.string() + ": duplicate id '" + id + "'");
    if (table.ids.empty()) throw InputError(path.string() + ": no label rows");
    return table;
}

void write_labels_csv(const LabelTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path.string());
    out << "id";
    for (const auto& c : table.categories) out << ',' << c;
    out << "\n";
    for (std::size_t r = 0; r < table.rows(); ++r) {
        out << table.ids[r];
        for (std::size_t c = 0; c < table.categories.size(); ++c) out << ',' << table.columns[c][r];
        out << "\n";
    }
}

std::vector<ClassDivision> divisions_from_labels(const LabelTable& table,
                                                 const EmbeddingSet& set,
                                                 const std::string& category) {
    auto cat_it = std::find(table.categories.begin(), table.categories.end(), category);
    if (cat_it == table.categories.end())
        throw InputError("unknown category '" + category + "'");
    const auto& column = table.columns[cat_it - table.categories.begin()];

    std::unordered_map<std::string_view, std::size_t> row_of_id;
    row_of_id.reserve(table.rows());
    for (std::size_t r = 0; r < table.rows(); ++r) row_of_id.emplace(table.ids[r], r);

    // std::map keeps divisions ordered by class name.
    std::map<std::string, std::vector<std::uint32_t>> by_class;
    for (std::size_t i = 0; i < set.n; ++i) {
        auto it = row_of_id.find(set.ids[i]);
        if (it == row_of_id.end())
            throw InputError("id '" + set.ids[i] + "' has no label row");
        by_class[column[it->second]].push_back(static_cast<std::uint32_t>(i));
    }

    std::vector<ClassDivision> out;
    out.reserve(by_class.size());
    for (auto& [name, members] : by_class) {
        std::sort(members.begin(), members.end());
        out.push_back({name, DivisionKind::individual, std::move(members)});
    }
    return out;
}

}  // namespace dendromatch
