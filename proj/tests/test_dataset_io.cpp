#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "helpers.hpp"
#include "vismap/dataset_io.hpp"
#include "vismap/synthetic.hpp"

using namespace vismap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "vismap_test_io" / name;
    fs::remove_all(p);
    fs::create_directories(p.parent_path());
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << s;
}

BundleErrc load_error(const fs::path& dir) {
    try {
        load_traversal(dir);
    } catch (const BundleError& e) {
        return e.code();
    }
    FAIL("expected BundleError");
    return BundleErrc::io;
}

Traversal two_by_three() {
    return test::make_traversal("b", {{0.0, "a", 0.5, {1, 2, 3}}, {10.0, "undefined", std::nullopt, {4, 5, 6}}});
}

} // namespace

TEST_CASE("load_traversal reads a 2x3 bundle") {
    const auto dir = scratch("two");
    write_traversal(two_by_three(), dir);
    const auto t = load_traversal(dir);
    CHECK(t.size() == 2);
    CHECK(t.descriptors.count() == 2);
    CHECK(t.descriptors.dim() == 3);
    CHECK(t.descriptor(1)[2] == 6.0f);
    CHECK(t.frames[0].memorability == 0.5);
    CHECK_FALSE(t.frames[1].memorability.has_value());
    CHECK_FALSE(t.frames[1].timestamp_s.has_value());
}

TEST_CASE("descriptor file layout is bit-exact") {
    Traversal t = test::make_traversal("one", {{0.0, "undefined", std::nullopt, {0.5f}}});
    const auto dir = scratch("one");
    write_traversal(t, dir);
    const std::string bytes = slurp(dir / kDescriptorFile);
    const std::string expected("VMDS\x01\x00\x00\x00\x01\x00\x00\x00\x01\x00\x00\x00\x00\x00\x00\x3f", 20);
    CHECK(bytes.size() == 16 + 4);
    CHECK(bytes == expected);
}

TEST_CASE("loader rejects malformed bundles with distinct errors") {
    const auto dir = scratch("bad");
    write_traversal(two_by_three(), dir);
    const std::string manifest = slurp(dir / kManifestFile);
    const std::string binary = slurp(dir / kDescriptorFile);

    SUBCASE("count mismatch") {
        spit(dir / kManifestFile,
             manifest + R"({"id":"x","index":2,"route_m":20.0,"timestamp_s":null,"label":"a","memorability":null})" "\n");
        CHECK(load_error(dir) == BundleErrc::count_mismatch);
        try {
            load_traversal(dir);
        } catch (const BundleError& e) {
            CHECK(std::string(e.what()).find("count mismatch") != std::string::npos);
        }
    }
    SUBCASE("bad magic") {
        spit(dir / kDescriptorFile, "XXXX" + binary.substr(4));
        CHECK(load_error(dir) == BundleErrc::bad_magic);
    }
    SUBCASE("bad version") {
        std::string b = binary;
        b[4] = 2;
        spit(dir / kDescriptorFile, b);
        CHECK(load_error(dir) == BundleErrc::bad_version);
    }
    SUBCASE("truncated payload") {
        spit(dir / kDescriptorFile, binary.substr(0, binary.size() - 1));
        CHECK(load_error(dir) == BundleErrc::truncated);
    }
    SUBCASE("non-finite descriptor names the offset") {
        std::string b = binary;
        b[16 + 3] = '\x7f';
        b[16 + 2] = '\xc0';
        spit(dir / kDescriptorFile, b);
        CHECK(load_error(dir) == BundleErrc::non_finite_descriptor);
        try {
            load_traversal(dir);
        } catch (const BundleError& e) {
            CHECK(std::string(e.what()).find("offset 16") != std::string::npos);
        }
    }
    SUBCASE("non-monotonic route names the line") {
        spit(dir / kManifestFile,
             R"({"id":"a","index":0,"route_m":10.0,"timestamp_s":null,"label":"a","memorability":null})" "\n"
             R"({"id":"b","index":1,"route_m":5.0,"timestamp_s":null,"label":"a","memorability":null})" "\n");
        CHECK(load_error(dir) == BundleErrc::non_monotonic_route);
        try {
            load_traversal(dir);
        } catch (const BundleError& e) {
            CHECK(std::string(e.what()).find(":2:") != std::string::npos);
        }
    }
    SUBCASE("memorability out of range") {
        spit(dir / kManifestFile,
             R"({"id":"a","index":0,"route_m":0.0,"timestamp_s":null,"label":"a","memorability":1.2})" "\n"
             R"({"id":"b","index":1,"route_m":5.0,"timestamp_s":null,"label":"a","memorability":null})" "\n");
        CHECK(load_error(dir) == BundleErrc::memorability_out_of_range);
    }
    SUBCASE("index out of order") {
        spit(dir / kManifestFile,
             R"({"id":"a","index":1,"route_m":0.0,"timestamp_s":null,"label":"a","memorability":null})" "\n"
             R"({"id":"b","index":0,"route_m":5.0,"timestamp_s":null,"label":"a","memorability":null})" "\n");
        CHECK(load_error(dir) == BundleErrc::index_mismatch);
    }
    SUBCASE("mixed position kinds") {
        spit(dir / kManifestFile,
             R"({"id":"a","index":0,"route_m":0.0,"timestamp_s":null,"label":"a","memorability":null})" "\n"
             R"({"id":"b","index":1,"pos_xy_m":[1.0,2.0],"timestamp_s":null,"label":"a","memorability":null})" "\n");
        CHECK(load_error(dir) == BundleErrc::mixed_position_kinds);
    }
    SUBCASE("malformed json") {
        spit(dir / kManifestFile, "{not json}\n{}\n");
        CHECK(load_error(dir) == BundleErrc::malformed_manifest);
    }
    SUBCASE("missing directory") {
        CHECK(load_error(dir / "nope") == BundleErrc::io);
    }
}

TEST_CASE("empty traversal is rejected on write") {
    Traversal t;
    t.name = "empty";
    try {
        write_traversal(t, scratch("empty"));
        FAIL("expected an error");
    } catch (const BundleError& e) {
        CHECK(e.code() == BundleErrc::empty_traversal);
        CHECK(std::string(e.what()) == "empty traversal rejected");
    }
}

TEST_CASE("round trip is the identity on random synthetic traversals") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        auto spec = test::small_spec(seed, 1 + seed % 4);
        spec.dim = 4 + seed % 9;
        spec.name = "rt" + std::to_string(seed);
        auto t = generate_synthetic(spec);
        if (seed % 3 == 0) t.frames[1].memorability.reset();
        if (seed % 4 == 0) t.frames[2].timestamp_s.reset();
        const auto dir = scratch(t.name);
        write_traversal(t, dir);
        CHECK(load_traversal(dir) == t);
    }
}

TEST_CASE("planar traversals round trip") {
    Traversal t;
    t.name = "planar";
    t.descriptors = DescriptorMatrix(2, 2, {0.1f, -0.2f, 3e-30f, 1e30f});
    t.frames.push_back({"a", 0, PlanarPoint{0.1, 0.7}, 1.25, "undefined", 0.3});
    t.frames.push_back({"b", 1, PlanarPoint{-5.0, 1e-9}, std::nullopt, "bridge", std::nullopt});
    const auto dir = scratch("planar");
    write_traversal(t, dir);
    CHECK(load_traversal(dir) == t);
}

TEST_CASE("generate_synthetic layout arithmetic") {
    SyntheticSpec s;
    s.classes = default_classes(2);
    s.frames_per_class = 5;
    s.undefined_frames = 10;
    s.spacing_m = 10.0;
    s.dim = 4;
    const auto t = generate_synthetic(s);
    REQUIRE(t.size() == 20);
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(std::get<double>(t.frames[i].position) == 10.0 * static_cast<double>(i));
        CHECK(t.frames[i].memorability.has_value());
    }
    CHECK(std::get<double>(t.frames.back().position) == 190.0);
    CHECK_NOTHROW(t.validate());

    std::size_t per_class[2] = {0, 0};
    for (const auto& f : t.frames) {
        if (f.label == "class0") ++per_class[0];
        if (f.label == "class1") ++per_class[1];
    }
    CHECK(per_class[0] == 5);
    CHECK(per_class[1] == 5);
}

TEST_CASE("scene classes occupy contiguous runs") {
    auto s = test::small_spec(3);
    s.runs_per_class = 1;
    const auto t = generate_synthetic(s);
    for (const auto& c : s.classes) {
        std::size_t first = t.size(), last = 0, count = 0;
        for (const auto& f : t.frames) {
            if (f.label != c.name) continue;
            first = std::min(first, f.index);
            last = std::max(last, f.index);
            ++count;
        }
        CHECK(last - first + 1 == count);
    }
}

TEST_CASE("generation is deterministic for a seed") {
    const auto spec = test::small_spec(9);
    const auto a = scratch("det_a"), b = scratch("det_b");
    write_traversal(generate_synthetic(spec), a);
    write_traversal(generate_synthetic(spec), b);
    CHECK(slurp(a / kDescriptorFile) == slurp(b / kDescriptorFile));
    CHECK(slurp(a / kManifestFile) == slurp(b / kManifestFile));
}

TEST_CASE("noise seed changes appearance only") {
    auto spec = test::small_spec(4);
    const auto a = generate_synthetic(spec);
    spec.noise_seed = 999;
    const auto b = generate_synthetic(spec);
    CHECK(a.frames == b.frames);
    CHECK_FALSE(a.descriptors == b.descriptors);
}

TEST_CASE("cluster mean separation") {
    SUBCASE("separation 0 collapses every mean") {
        auto s = test::small_spec(2);
        s.separation = 0.0;
        const auto means = synthetic_cluster_means(s);
        for (const auto& m : means) CHECK(m == means.front());
    }
    SUBCASE("separation >= 5 keeps means at least 5 sigma apart") {
        for (double sep : {5.0, 6.5, 10.0}) {
            auto s = test::small_spec(8);
            s.separation = sep;
            s.sigma = 0.7;
            const auto means = synthetic_cluster_means(s);
            for (std::size_t i = 0; i < means.size(); ++i) {
                for (std::size_t j = i + 1; j < means.size(); ++j) {
                    double d2 = 0.0;
                    for (std::size_t k = 0; k < means[i].size(); ++k) d2 += std::pow(means[i][k] - means[j][k], 2);
                    CHECK(std::sqrt(d2) >= 5.0 * s.sigma);
                }
            }
        }
    }
}

TEST_CASE("synthetic spec validation") {
    auto s = test::small_spec(1);
    s.sigma = 0.0;
    CHECK_THROWS_AS(generate_synthetic(s), ConfigError);
    s = test::small_spec(1);
    s.spacing_m = -1.0;
    CHECK_THROWS_AS(generate_synthetic(s), ConfigError);
    s = test::small_spec(1);
    s.dim = 3;
    CHECK_THROWS_AS(generate_synthetic(s), ConfigError);
}
