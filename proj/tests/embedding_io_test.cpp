#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "dendromatch/embedding_io.hpp"
#include "dendromatch/errors.hpp"

using namespace dendromatch;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    auto dir = fs::temp_directory_path() / "dendromatch_io_test";
    fs::create_directories(dir);
    return dir / name;
}

fs::path write_file(const std::string& name, const std::string& text) {
    auto path = temp_file(name);
    std::ofstream out(path);
    out << text;
    return path;
}

}  // namespace

TEST_CASE("embeddings csv: basic parse") {
    auto path = write_file("basic.csv", "id,dim0,dim1\na,0,0\nb,1.5,-2\nc,3,4\n");
    auto set = load_embeddings(path, EmbeddingFormat::csv);
    CHECK(set.n == 3);
    CHECK(set.d == 2);
    CHECK(set.ids[1] == "b");
    CHECK(set.at(1, 0) == 1.5);
    CHECK(set.at(2, 1) == 4.0);
}

TEST_CASE("embeddings csv: NaN coordinate rejected with row number") {
    auto path = write_file("nan.csv", "id,dim0\na,1\nb,NaN\n");
    CHECK_THROWS_WITH_AS(load_embeddings_csv(path),
                         doctest::Contains("row 3"), InputError);
}

TEST_CASE("embeddings csv: duplicate id rejected") {
    auto path = write_file("dup.csv", "id,dim0\na,1\na,2\n");
    CHECK_THROWS_WITH_AS(load_embeddings_csv(path), doctest::Contains("duplicate id 'a'"),
                         InputError);
}

TEST_CASE("embeddings csv: dimension mismatch rejected with row number") {
    auto path = write_file("dims.csv", "id,dim0,dim1\na,1,2\nb,3\n");
    CHECK_THROWS_WITH_AS(load_embeddings_csv(path), doctest::Contains("row 3"), InputError);
}

TEST_CASE("embeddings csv: malformed header rejected") {
    auto path = write_file("hdr.csv", "id,x0,x1\na,1,2\n");
    CHECK_THROWS_AS(load_embeddings_csv(path), InputError);
}

TEST_CASE("embeddings csv: write then read round-trips") {
    EmbeddingSet set;
    set.n = 4;
    set.d = 3;
    set.ids = {"p0", "p1", "p2", "p3"};
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> dist(-10, 10);
    for (std::size_t i = 0; i < set.n * set.d; ++i) set.data.push_back(dist(gen));
    auto path = temp_file("roundtrip.csv");
    write_embeddings_csv(set, path);
    auto back = load_embeddings_csv(path);
    CHECK(back.ids == set.ids);
    CHECK(back.data == set.data);  // shortest-round-trip formatting is exact
}

TEST_CASE("embeddings raw: 100x256 write-then-read is bit-exact") {
    EmbeddingSet set;
    set.n = 100;
    set.d = 256;
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<float> dist(-5, 5);
    for (std::size_t i = 0; i < set.n; ++i) set.ids.push_back("r" + std::to_string(i));
    for (std::size_t i = 0; i < set.n * set.d; ++i)
        set.data.push_back(static_cast<double>(dist(gen)));  // exactly float32-representable

    auto bin = temp_file("rt.emb");
    auto ids = temp_file("rt.ids");
    write_embeddings_raw(set, bin, ids);
    auto back = load_embeddings(bin, EmbeddingFormat::raw_binary, ids);
    CHECK(back.n == set.n);
    CHECK(back.d == set.d);
    CHECK(back.ids == set.ids);
    CHECK(back.data == set.data);

    // and the file itself round-trips byte for byte
    auto bin2 = temp_file("rt2.emb");
    auto ids2 = temp_file("rt2.ids");
    write_embeddings_raw(back, bin2, ids2);
    std::ifstream f1(bin, std::ios::binary), f2(bin2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
}

TEST_CASE("embeddings raw: bad magic rejected") {
    auto path = write_file("bad.emb", "NOPE....");
    auto ids = write_file("bad.ids", "a\n");
    CHECK_THROWS_AS(load_embeddings_raw(path, ids), InputError);
}

TEST_CASE("labels: basic parse keeps category order") {
    auto path = write_file("labels.csv",
                           "id,identity,gender,nationality\n"
                           "a,spk1,M,UK\nb,spk1,M,US\nc,spk2,F,UK\nd,spk3,F,US\n");
    auto table = load_labels(path);
    CHECK(table.categories == std::vector<std::string>{"identity", "gender", "nationality"});
    CHECK(table.rows() == 4);
    CHECK(table.columns[1][2] == "F");
}

TEST_CASE("labels: duplicate id rejected by name") {
    auto path = write_file("lbl_dup.csv", "id,gender\na,M\na,F\n");
    CHECK_THROWS_WITH_AS(load_labels(path), doctest::Contains("'a'"), InputError);
}

TEST_CASE("labels: empty cell rejected") {
    auto path = write_file("lbl_empty.csv", "id,gender,nation\na,M,\n");
    CHECK_THROWS_AS(load_labels(path), InputError);
}

TEST_CASE("divisions: two-class gender partition") {
    auto lbl = write_file("div.csv", "id,gender\np0,M\np1,M\np2,F\np3,F\n");
    auto emb = write_file("div_emb.csv", "id,dim0\np0,0\np1,1\np2,2\np3,3\n");
    auto table = load_labels(lbl);
    auto set = load_embeddings_csv(emb);
    auto divs = divisions_from_labels(table, set, "gender");
    REQUIRE(divs.size() == 2);
    CHECK(divs[0].name == "F");
    CHECK(divs[0].members == std::vector<std::uint32_t>{2, 3});
    CHECK(divs[1].name == "M");
    CHECK(divs[1].members == std::vector<std::uint32_t>{0, 1});
}

TEST_CASE("divisions: single class covers everything") {
    auto lbl = write_file("one.csv", "id,g\na,x\nb,x\n");
    auto emb = write_file("one_emb.csv", "id,dim0\na,0\nb,1\n");
    auto divs = divisions_from_labels(load_labels(lbl), load_embeddings_csv(emb), "g");
    REQUIRE(divs.size() == 1);
    CHECK(divs[0].members == std::vector<std::uint32_t>{0, 1});
}

TEST_CASE("divisions: alignment is by id, not row order") {
    auto emb = write_file("perm_emb.csv", "id,dim0\na,0\nb,1\nc,2\n");
    auto straight = write_file("perm1.csv", "id,g\na,x\nb,y\nc,x\n");
    auto permuted = write_file("perm2.csv", "id,g\nc,x\na,x\nb,y\n");
    auto set = load_embeddings_csv(emb);
    auto d1 = divisions_from_labels(load_labels(straight), set, "g");
    auto d2 = divisions_from_labels(load_labels(permuted), set, "g");
    REQUIRE(d1.size() == d2.size());
    for (std::size_t i = 0; i < d1.size(); ++i) {
        CHECK(d1[i].name == d2[i].name);
        CHECK(d1[i].members == d2[i].members);
    }
}

TEST_CASE("divisions: unknown category and missing id errors") {
    auto lbl = write_file("err.csv", "id,g\na,x\n");
    auto emb = write_file("err_emb.csv", "id,dim0\na,0\nb,1\n");
    auto table = load_labels(lbl);
    auto set = load_embeddings_csv(emb);
    CHECK_THROWS_WITH_AS(divisions_from_labels(table, set, "h"),
                         doctest::Contains("unknown category"), InputError);
    CHECK_THROWS_WITH_AS(divisions_from_labels(table, set, "g"), doctest::Contains("'b'"),
                         InputError);
}

TEST_CASE("divisions: per-category partition property") {
    // three categories with 4+2+3 classes over 60 points
    std::string lbl = "id,a,b,c\n";
    std::string emb = "id,dim0\n";
    for (int i = 0; i < 60; ++i) {
        lbl += "p" + std::to_string(i) + ",a" + std::to_string(i % 4) + ",b" +
               std::to_string(i % 2) + ",c" + std::to_string(i % 3) + "\n";
        emb += "p" + std::to_string(i) + "," + std::to_string(i) + "\n";
    }
    auto table = load_labels(write_file("part.csv", lbl));
    auto set = load_embeddings_csv(write_file("part_emb.csv", emb));
    for (const auto& cat : table.categories) {
        auto divs = divisions_from_labels(table, set, cat);
        std::vector<bool> seen(set.n, false);
        std::size_t total = 0;
        for (const auto& d : divs) {
            CHECK(std::is_sorted(d.members.begin(), d.members.end()));
            for (auto idx : d.members) {
                CHECK(!seen[idx]);
                seen[idx] = true;
            }
            total += d.members.size();
        }
        CHECK(total == set.n);
    }
}
