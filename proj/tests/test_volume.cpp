#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "pipecomm/errors.hpp"
#include "pipecomm/volume.hpp"

using namespace pipecomm;

namespace {

// Byte-level NIfTI-1 builder, independent of the reader/writer under test.
struct NiftiBytes {
    std::vector<unsigned char> bytes = std::vector<unsigned char>(348, 0);
    bool swap = false; // emit all multi-byte fields byte-swapped

    void put_raw(std::size_t off, const void* p, std::size_t n, bool swap_field) {
        const unsigned char* src = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i)
            bytes[off + i] = swap_field && swap ? src[n - 1 - i] : src[i];
    }
    void i32(std::size_t off, std::int32_t v) { put_raw(off, &v, 4, true); }
    void i16(std::size_t off, std::int16_t v) { put_raw(off, &v, 2, true); }
    void f32(std::size_t off, float v) { put_raw(off, &v, 4, true); }

    void standard(int nx, int ny, int nz, std::int16_t datatype, std::int16_t bitpix,
                  float vox_offset = 352.0f) {
        i32(0, 348);
        i16(40, 3); // dim[0]
        i16(42, std::int16_t(nx));
        i16(44, std::int16_t(ny));
        i16(46, std::int16_t(nz));
        for (int d = 4; d <= 7; ++d) i16(40 + 2 * std::size_t(d), 1);
        i16(70, datatype);
        i16(72, bitpix);
        f32(76, 1.0f); // pixdim[0] qfac
        f32(80, 1.0f);
        f32(84, 1.0f);
        f32(88, 1.0f);
        f32(108, vox_offset);
        f32(112, 1.0f); // scl_slope
        f32(116, 0.0f); // scl_inter
        i16(254, 1);    // sform_code
        // srow: identity spacing
        f32(280, 1.0f);
        f32(296 + 4, 1.0f);
        f32(312 + 8, 1.0f);
        std::memcpy(bytes.data() + 344, "n+1\0", 4);
    }

    void pad_to_offset(std::size_t off) { bytes.resize(off, 0); }

    template <typename T>
    void append(T v) {
        unsigned char raw[sizeof(T)];
        std::memcpy(raw, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T); ++i)
            bytes.push_back(swap ? raw[sizeof(T) - 1 - i] : raw[i]);
    }

    std::string write(const std::string& name) const {
        const std::string path =
            (std::filesystem::temp_directory_path() / name).string();
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        os.write(reinterpret_cast<const char*>(bytes.data()),
                 std::streamsize(bytes.size()));
        return path;
    }
};

} // namespace

TEST_CASE("reads float32 little-endian with identity scaling") {
    NiftiBytes n;
    n.standard(2, 2, 2, 16, 32);
    n.pad_to_offset(352);
    for (int i = 0; i < 8; ++i) n.append(float(i));
    const Volume v = read_volume(n.write("pc_f32.nii"));
    CHECK(v.dims[0] == 2);
    CHECK(v.dims[1] == 2);
    CHECK(v.dims[2] == 2);
    for (int i = 0; i < 8; ++i) CHECK(v.data[std::size_t(i)] == float(i));
    CHECK(v.at(1, 0, 0) == 1.0f); // x fastest
    CHECK(v.at(0, 1, 0) == 2.0f);
    CHECK(v.at(0, 0, 1) == 4.0f);
}

TEST_CASE("applies slope and intercept to int16 data") {
    NiftiBytes n;
    n.standard(2, 2, 1, 4, 16);
    n.f32(112, 2.0f);
    n.f32(116, -1.0f);
    n.pad_to_offset(352);
    for (int i = 0; i < 4; ++i) n.append(std::int16_t(i));
    const Volume v = read_volume(n.write("pc_i16.nii"));
    for (int i = 0; i < 4; ++i) CHECK(v.data[std::size_t(i)] == float(2 * i - 1));
}

TEST_CASE("detects byte-swapped files from sizeof_hdr") {
    NiftiBytes n;
    n.swap = true;
    n.standard(2, 1, 1, 64, 64);
    n.pad_to_offset(352);
    n.append(3.5);
    n.append(-2.25);
    const Volume v = read_volume(n.write("pc_be.nii"));
    CHECK(v.data[0] == 3.5f);
    CHECK(v.data[1] == -2.25f);
}

TEST_CASE("honours vox_offset beyond the header") {
    NiftiBytes n;
    n.standard(1, 1, 1, 16, 32, 400.0f);
    n.pad_to_offset(400);
    n.append(7.0f);
    const Volume v = read_volume(n.write("pc_off.nii"));
    CHECK(v.data[0] == 7.0f);
}

TEST_CASE("reads the sform affine") {
    NiftiBytes n;
    n.standard(1, 1, 1, 16, 32);
    n.f32(280, 2.0f);
    n.f32(280 + 12, -10.0f); // srow_x translation
    n.pad_to_offset(352);
    n.append(0.0f);
    const Volume v = read_volume(n.write("pc_sform.nii"));
    CHECK(v.affine.at(0, 0) == 2.0f);
    CHECK(v.affine.at(0, 3) == -10.0f);
    CHECK(v.affine.at(3, 3) == 1.0);
}

TEST_CASE("nan handling follows the requested policy") {
    NiftiBytes n;
    n.standard(2, 2, 1, 16, 32);
    n.pad_to_offset(352);
    n.append(1.0f);
    n.append(std::nanf(""));
    n.append(3.0f);
    n.append(4.0f);
    const std::string path = n.write("pc_nan.nii");

    const Volume zeroed = read_volume(path, NanPolicy::zero_fill);
    CHECK(zeroed.data[1] == 0.0f);
    CHECK(zeroed.data[2] == 3.0f);

    CHECK_THROWS_AS(read_volume(path, NanPolicy::reject), Error);
    try {
        read_volume(path, NanPolicy::reject);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::non_finite_data);
    }

    const Volume mask = read_finite_mask(path);
    CHECK(mask.data == std::vector<float>{1.0f, 0.0f, 1.0f, 1.0f});
}

TEST_CASE("rejects malformed files with specific errors") {
    auto code_of = [](const std::string& path) {
        try {
            read_volume(path);
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::bad_config;
    };

    SUBCASE("missing file") {
        CHECK(code_of("/definitely/not/here.nii") == Errc::io_error);
    }
    SUBCASE("short header") {
        NiftiBytes n;
        n.standard(1, 1, 1, 16, 32);
        n.bytes.resize(100);
        CHECK(code_of(n.write("pc_short.nii")) == Errc::truncated_file);
    }
    SUBCASE("truncated data") {
        NiftiBytes n;
        n.standard(2, 2, 2, 16, 32);
        n.pad_to_offset(352);
        n.append(1.0f); // 7 values missing
        CHECK(code_of(n.write("pc_trunc.nii")) == Errc::truncated_file);
    }
    SUBCASE("bad magic") {
        NiftiBytes n;
        n.standard(1, 1, 1, 16, 32);
        std::memcpy(n.bytes.data() + 344, "ni1\0", 4);
        n.pad_to_offset(352);
        n.append(0.0f);
        CHECK(code_of(n.write("pc_magic.nii")) == Errc::unsupported_format);
    }
    SUBCASE("unsupported datatype") {
        NiftiBytes n;
        n.standard(1, 1, 1, 2, 8); // uint8
        n.pad_to_offset(352);
        n.bytes.push_back(0);
        CHECK(code_of(n.write("pc_dtype.nii")) == Errc::unsupported_format);
    }
    SUBCASE("4D file") {
        NiftiBytes n;
        n.standard(1, 1, 1, 16, 32);
        n.i16(40, 4);
        n.pad_to_offset(352);
        n.append(0.0f);
        CHECK(code_of(n.write("pc_4d.nii")) == Errc::unsupported_format);
    }
    SUBCASE("missing sform") {
        NiftiBytes n;
        n.standard(1, 1, 1, 16, 32);
        n.i16(254, 0);
        n.pad_to_offset(352);
        n.append(0.0f);
        CHECK(code_of(n.write("pc_sform0.nii")) == Errc::unsupported_format);
    }
}

TEST_CASE("writer round-trips through the reader") {
    Affine a = Affine::scaling(2.0, 2.0, 3.0);
    a.at(0, 3) = -16.0;
    a.at(1, 3) = -16.0;
    a.at(2, 3) = -24.0;
    Volume v = Volume::filled({3, 2, 2}, a, 0.0f);
    for (std::size_t i = 0; i < v.data.size(); ++i) v.data[i] = float(i) * 0.5f - 2.0f;

    const std::string path =
        (std::filesystem::temp_directory_path() / "pc_roundtrip.nii").string();
    write_volume(v, path);

    // on-disk invariants, checked against raw bytes
    std::ifstream in(path, std::ios::binary);
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    REQUIRE(raw.size() == 352 + v.data.size() * 4);
    auto get_i16 = [&](std::size_t off) {
        std::int16_t x;
        std::memcpy(&x, raw.data() + off, 2);
        return x;
    };
    auto get_f32 = [&](std::size_t off) {
        float x;
        std::memcpy(&x, raw.data() + off, 4);
        return x;
    };
    CHECK(get_i16(70) == 16);  // float32
    CHECK(get_i16(72) == 32);
    CHECK(get_f32(108) == 352.0f);
    CHECK(get_i16(254) == 1);
    CHECK(std::memcmp(raw.data() + 344, "n+1\0", 4) == 0);
    CHECK(get_f32(80) == 2.0f); // pixdim from affine column norms
    CHECK(get_f32(88) == 3.0f);

    const Volume back = read_volume(path);
    CHECK(back.dims == v.dims);
    CHECK(back.data == v.data);
    CHECK(back.affine.approx_equal(v.affine, 1e-5));
}

TEST_CASE("writer refuses non-finite data") {
    Volume v = Volume::filled({2, 1, 1}, Affine::identity(), 1.0f);
    v.data[1] = std::nanf("");
    const std::string path =
        (std::filesystem::temp_directory_path() / "pc_badwrite.nii").string();
    CHECK_THROWS_AS(write_volume(v, path), Error);
}
