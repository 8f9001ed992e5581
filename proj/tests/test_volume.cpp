#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "ctsynth/volume.hpp"
#include "test_helpers.hpp"

using namespace ctsynth;

TEST_CASE("save/load round trips bit-exactly") {
    testutil::TempDir tmp("volume_io");
    DetRng rng(7);

    Volume v = testutil::random_volume(8, 8, 8, rng);
    const std::string path = tmp.str() + "/v.ctv";
    save_volume(v, path);
    const Volume back = load_volume(path);
    CHECK(back.dims == v.dims);
    CHECK(back.data == v.data);
}

TEST_CASE("load of an all-zero 4x4x4 file") {
    testutil::TempDir tmp("volume_zero");
    Volume v(4, 4, 4, 0.0);
    const std::string path = tmp.str() + "/z.ctv";
    save_volume(v, path);
    const Volume back = load_volume(path);
    CHECK(back.dims == std::array<std::int64_t, 3>{4, 4, 4});
    for (double x : back.data) CHECK(x == 0.0);
}

TEST_CASE("file size matches header plus payload") {
    testutil::TempDir tmp("volume_size");
    Volume v(512, 512, 9, 1.0); // scaled-down z to keep the test quick
    const std::string path = tmp.str() + "/s.ctv";
    save_volume(v, path);
    CHECK(std::filesystem::file_size(path) == 16u + 4u * 512u * 512u * 9u);
}

TEST_CASE("bad magic is rejected") {
    testutil::TempDir tmp("volume_magic");
    const std::string path = tmp.str() + "/bad.ctv";
    std::ofstream f(path, std::ios::binary);
    f << "XXXX";
    const std::uint32_t dims[3] = {4, 4, 4};
    f.write(reinterpret_cast<const char*>(dims), 12);
    f.close();
    try {
        load_volume(path);
        FAIL("expected bad-magic");
    } catch (const error& e) {
        CHECK(e.code() == errc::bad_magic);
    }
}

TEST_CASE("truncated payload is rejected") {
    testutil::TempDir tmp("volume_trunc");
    const std::string path = tmp.str() + "/t.ctv";
    {
        Volume v(4, 4, 4, 1.0);
        save_volume(v, path);
    }
    std::filesystem::resize_file(path, 16 + 32 * 4); // keep 32 of 64 voxels
    try {
        load_volume(path);
        FAIL("expected truncated-file");
    } catch (const error& e) {
        CHECK(e.code() == errc::truncated_file);
    }
}

TEST_CASE("zero dimension is rejected") {
    testutil::TempDir tmp("volume_dim0");
    const std::string path = tmp.str() + "/d.ctv";
    std::ofstream f(path, std::ios::binary);
    f << "CTV1";
    const std::uint32_t dims[3] = {0, 32, 32};
    f.write(reinterpret_cast<const char*>(dims), 12);
    f.close();
    try {
        load_volume(path);
        FAIL("expected dimension-overflow");
    } catch (const error& e) {
        CHECK(e.code() == errc::dimension_overflow);
    }
}

TEST_CASE("non-finite voxels are rejected on save and load") {
    testutil::TempDir tmp("volume_nan");
    Volume v(2, 2, 2, 0.0);
    v.data[3] = std::nan("");
    try {
        save_volume(v, tmp.str() + "/n.ctv");
        FAIL("expected non-finite-voxel");
    } catch (const error& e) {
        CHECK(e.code() == errc::non_finite_voxel);
    }

    // craft a file with a NaN payload
    const std::string path = tmp.str() + "/nan.ctv";
    std::ofstream f(path, std::ios::binary);
    f << "CTV1";
    const std::uint32_t dims[3] = {1, 1, 2};
    f.write(reinterpret_cast<const char*>(dims), 12);
    const float payload[2] = {1.0f, std::numeric_limits<float>::quiet_NaN()};
    f.write(reinterpret_cast<const char*>(payload), 8);
    f.close();
    try {
        load_volume(path);
        FAIL("expected non-finite-voxel");
    } catch (const error& e) {
        CHECK(e.code() == errc::non_finite_voxel);
    }
}

TEST_CASE("partition tiling counts") {
    DetRng rng(3);

    SUBCASE("64^3 at edge 32 gives 8 blocks, no padding") {
        Volume v = testutil::random_volume(64, 64, 64, rng);
        auto [grid, blocks] = partition(v, 32);
        CHECK(blocks.size() == 8);
        CHECK(grid.padded_dims == std::array<std::int64_t, 3>{64, 64, 64});
    }
    SUBCASE("32^3 is exactly one block equal to the volume") {
        Volume v = testutil::random_volume(32, 32, 32, rng);
        auto [grid, blocks] = partition(v, 32);
        REQUIRE(blocks.size() == 1);
        CHECK(blocks[0].data == v.data);
    }
    SUBCASE("512x512x96 gives 768 blocks") {
        const BlockGrid g = make_block_grid({512, 512, 96}, 32, -1.0);
        CHECK(g.total_blocks() == 768);
    }
    SUBCASE("48^3 pads to 64^3 with pad value in the margin") {
        Volume v = testutil::random_volume(48, 48, 48, rng);
        auto [grid, blocks] = partition(v, 32, -1.0);
        CHECK(grid.padded_dims == std::array<std::int64_t, 3>{64, 64, 64});
        CHECK(blocks.size() == 8);
        // the (1,1,1) corner block is fully in the pad region except its
        // [0,16) cube
        const auto& corner = blocks.back();
        CHECK(corner.origin == std::array<std::int64_t, 3>{32, 32, 32});
        CHECK(corner.at(31, 31, 31) == -1.0);
        CHECK(corner.at(0, 0, 0) == v.at(32, 32, 32));
    }
}

TEST_CASE("block order is z-major, then y, then x") {
    Volume v(64, 64, 64, 0.0);
    auto [grid, blocks] = partition(v, 32);
    REQUIRE(blocks.size() == 8);
    CHECK(blocks[0].origin == std::array<std::int64_t, 3>{0, 0, 0});
    CHECK(blocks[1].origin == std::array<std::int64_t, 3>{32, 0, 0});
    CHECK(blocks[2].origin == std::array<std::int64_t, 3>{0, 32, 0});
    CHECK(blocks[4].origin == std::array<std::int64_t, 3>{0, 0, 32});
}

TEST_CASE("stitch inverts partition bit-exactly") {
    DetRng rng(11);
    SUBCASE("divisible dims") {
        Volume v = testutil::random_volume(64, 64, 64, rng);
        auto [grid, blocks] = partition(v, 32);
        CHECK(stitch(grid, blocks).data == v.data);
    }
    SUBCASE("pad path") {
        Volume v = testutil::random_volume(48, 48, 48, rng);
        auto [grid, blocks] = partition(v, 32);
        const Volume back = stitch(grid, blocks);
        CHECK(back.dims == v.dims);
        CHECK(back.data == v.data);
    }
}

TEST_CASE("property: stitch(partition(v, e)) == v over random dims 1-80") {
    DetRng rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        const auto nx = static_cast<std::int64_t>(1 + rng.next_below(80));
        const auto ny = static_cast<std::int64_t>(1 + rng.next_below(80));
        const auto nz = static_cast<std::int64_t>(1 + rng.next_below(80));
        const auto edge = static_cast<std::int64_t>(2 + rng.next_below(40));
        Volume v = testutil::random_volume(nx, ny, nz, rng);
        auto [grid, blocks] = partition(v, edge);
        const Volume back = stitch(grid, blocks);
        REQUIRE(back.dims == v.dims);
        REQUIRE(back.data == v.data);
    }
}

TEST_CASE("stitch rejects bad block sets") {
    DetRng rng(5);
    Volume v = testutil::random_volume(64, 64, 32, rng);
    auto [grid, blocks] = partition(v, 32);

    SUBCASE("missing block") {
        auto missing = blocks;
        missing.pop_back();
        try {
            stitch(grid, missing);
            FAIL("expected grid-mismatch");
        } catch (const error& e) {
            CHECK(e.code() == errc::grid_mismatch);
        }
    }
    SUBCASE("duplicate origin") {
        auto dup = blocks;
        dup.back().origin = dup.front().origin;
        try {
            stitch(grid, dup);
            FAIL("expected grid-mismatch");
        } catch (const error& e) {
            CHECK(e.code() == errc::grid_mismatch);
        }
    }
}
