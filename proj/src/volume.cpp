#include "pipecomm/volume.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "pipecomm/errors.hpp"
#include "pipecomm/log.hpp"

namespace pipecomm {

namespace {

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kMinVoxOffset = 352;

// Field offsets in the 348-byte header.
constexpr std::size_t kOffDim = 40;      // int16[8]
constexpr std::size_t kOffDatatype = 70; // int16
constexpr std::size_t kOffBitpix = 72;   // int16
constexpr std::size_t kOffPixdim = 76;   // float[8]
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffSclSlope = 112;
constexpr std::size_t kOffSclInter = 116;
constexpr std::size_t kOffQformCode = 252;
constexpr std::size_t kOffSformCode = 254;
constexpr std::size_t kOffSrowX = 280; // float[4] x 3 rows
constexpr std::size_t kOffMagic = 344; // char[4]

constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtFloat32 = 16;
constexpr std::int16_t kDtFloat64 = 64;

std::uint16_t bswap16(std::uint16_t v) { return std::uint16_t((v >> 8) | (v << 8)); }
std::uint32_t bswap32(std::uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0x0000ff00u) | ((v << 8) & 0x00ff0000u) | (v << 24);
}
std::uint64_t bswap64(std::uint64_t v) {
    return (std::uint64_t(bswap32(std::uint32_t(v))) << 32) | bswap32(std::uint32_t(v >> 32));
}

struct Reader {
    const std::uint8_t* buf;
    bool swap;

    std::int16_t i16(std::size_t off) const {
        std::uint16_t v;
        std::memcpy(&v, buf + off, 2);
        if (swap) v = bswap16(v);
        return std::bit_cast<std::int16_t>(v);
    }
    std::int32_t i32(std::size_t off) const {
        std::uint32_t v;
        std::memcpy(&v, buf + off, 4);
        if (swap) v = bswap32(v);
        return std::bit_cast<std::int32_t>(v);
    }
    float f32(std::size_t off) const {
        std::uint32_t v;
        std::memcpy(&v, buf + off, 4);
        if (swap) v = bswap32(v);
        return std::bit_cast<float>(v);
    }
};

struct RawVolume {
    std::array<int, 3> dims;
    Affine affine;
    std::vector<double> values; // scaled, possibly non-finite
};

// Parses header + data; applies scl_slope/scl_inter; no finiteness policy yet.
RawVolume load_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open " + path);

    std::array<std::uint8_t, kHeaderSize> hdr;
    if (!in.read(reinterpret_cast<char*>(hdr.data()), kHeaderSize))
        throw Error(Errc::truncated_file, path + ": header shorter than 348 bytes");

    std::int32_t size_native;
    std::memcpy(&size_native, hdr.data(), 4);
    bool swap;
    if (size_native == 348) {
        swap = false;
    } else if (std::int32_t(bswap32(std::uint32_t(size_native))) == 348) {
        swap = true;
    } else {
        throw Error(Errc::unsupported_format, path + ": header size field is not 348");
    }
    Reader r{hdr.data(), swap};

    char magic[4];
    std::memcpy(magic, hdr.data() + kOffMagic, 4);
    if (std::memcmp(magic, "n+1\0", 4) != 0)
        throw Error(Errc::unsupported_format,
                    path + ": magic is not \"n+1\" (detached-header and other variants are unsupported)");

    const std::int16_t ndim = r.i16(kOffDim);
    if (ndim != 3)
        throw Error(Errc::unsupported_format,
                    path + ": dim[0]=" + std::to_string(ndim) + ", only 3-D volumes are supported");

    std::array<int, 3> dims{r.i16(kOffDim + 2), r.i16(kOffDim + 4), r.i16(kOffDim + 6)};
    for (int d : dims)
        if (d <= 0)
            throw Error(Errc::unsupported_format, path + ": non-positive dimension");

    const std::int16_t datatype = r.i16(kOffDatatype);
    if (datatype != kDtInt16 && datatype != kDtFloat32 && datatype != kDtFloat64)
        throw Error(Errc::unsupported_format,
                    path + ": datatype " + std::to_string(datatype) +
                        " (supported: int16=4, float32=16, float64=64)");

    if (r.i16(kOffSformCode) <= 0)
        throw Error(Errc::unsupported_format, path + ": sform code is 0, qform-only files are rejected");

    Affine aff;
    for (int row = 0; row < 3; ++row)
        for (int col = 0; col < 4; ++col)
            aff.at(row, col) = r.f32(kOffSrowX + std::size_t(row) * 16 + std::size_t(col) * 4);

    const float vox_offset_f = r.f32(kOffVoxOffset);
    if (!(vox_offset_f >= float(kMinVoxOffset)) || vox_offset_f != std::floor(vox_offset_f))
        throw Error(Errc::unsupported_format, path + ": vox_offset must be an integer >= 352");
    const std::size_t vox_offset = std::size_t(vox_offset_f);

    double slope = r.f32(kOffSclSlope);
    double inter = r.f32(kOffSclInter);
    if (!std::isfinite(slope) || !std::isfinite(inter))
        throw Error(Errc::unsupported_format, path + ": non-finite scl_slope/scl_inter");
    if (slope == 0.0) {
        slope = 1.0;
        inter = 0.0;
    }

    const std::size_t n =
        std::size_t(dims[0]) * std::size_t(dims[1]) * std::size_t(dims[2]);
    const std::size_t elem = (datatype == kDtInt16) ? 2 : (datatype == kDtFloat32) ? 4 : 8;

    in.seekg(std::streamoff(vox_offset), std::ios::beg);
    std::vector<std::uint8_t> raw(n * elem);
    if (!in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size())))
        throw Error(Errc::truncated_file,
                    path + ": expected " + std::to_string(raw.size()) + " data bytes");

    RawVolume out;
    out.dims = dims;
    out.affine = aff;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v;
        if (datatype == kDtInt16) {
            std::uint16_t u;
            std::memcpy(&u, raw.data() + i * 2, 2);
            if (swap) u = bswap16(u);
            v = double(std::bit_cast<std::int16_t>(u));
        } else if (datatype == kDtFloat32) {
            std::uint32_t u;
            std::memcpy(&u, raw.data() + i * 4, 4);
            if (swap) u = bswap32(u);
            v = double(std::bit_cast<float>(u));
        } else {
            std::uint64_t u;
            std::memcpy(&u, raw.data() + i * 8, 8);
            if (swap) u = bswap64(u);
            v = std::bit_cast<double>(u);
        }
        out.values[i] = slope * v + inter;
    }
    return out;
}

} // namespace

Volume Volume::filled(std::array<int, 3> dims, const Affine& affine, float value) {
    Volume v;
    v.dims = dims;
    v.affine = affine;
    v.data.assign(v.nvox(), value);
    return v;
}

Volume read_volume(const std::string& path, NanPolicy policy) {
    RawVolume raw = load_raw(path);
    Volume v;
    v.dims = raw.dims;
    v.affine = raw.affine;
    v.data.resize(raw.values.size());
    std::size_t nan_count = 0;
    for (std::size_t i = 0; i < raw.values.size(); ++i) {
        const double d = raw.values[i];
        if (std::isnan(d)) {
            if (policy == NanPolicy::reject)
                throw Error(Errc::non_finite_data, path + ": NaN voxel at linear index " + std::to_string(i));
            ++nan_count;
            v.data[i] = 0.0f;
            continue;
        }
        const float f = float(d);
        if (!std::isfinite(f))
            throw Error(Errc::non_finite_data, path + ": infinite voxel at linear index " + std::to_string(i));
        v.data[i] = f;
    }
    if (nan_count > 0)
        warn(path + ": " + std::to_string(nan_count) + " NaN voxels replaced by 0");
    return v;
}

Volume read_finite_mask(const std::string& path) {
    RawVolume raw = load_raw(path);
    Volume v;
    v.dims = raw.dims;
    v.affine = raw.affine;
    v.data.resize(raw.values.size());
    for (std::size_t i = 0; i < raw.values.size(); ++i)
        v.data[i] = std::isfinite(raw.values[i]) ? 1.0f : 0.0f;
    return v;
}

namespace {

void put_i16(std::uint8_t* buf, std::size_t off, std::int16_t v) {
    const auto u = std::bit_cast<std::uint16_t>(v);
    buf[off] = std::uint8_t(u & 0xff);
    buf[off + 1] = std::uint8_t(u >> 8);
}
void put_i32(std::uint8_t* buf, std::size_t off, std::int32_t v) {
    const auto u = std::bit_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) buf[off + std::size_t(b)] = std::uint8_t((u >> (8 * b)) & 0xff);
}
void put_f32(std::uint8_t* buf, std::size_t off, float v) {
    put_i32(buf, off, std::bit_cast<std::int32_t>(v));
}

} // namespace

void write_volume(const Volume& v, const std::string& path) {
    if (v.data.size() != v.nvox())
        throw Error(Errc::io_error, "volume data length does not match dims");
    for (std::size_t i = 0; i < v.data.size(); ++i)
        if (!std::isfinite(v.data[i]))
            throw Error(Errc::non_finite_data,
                        "refusing to write non-finite voxel at linear index " + std::to_string(i));

    std::array<std::uint8_t, kMinVoxOffset> hdr{}; // 348-byte header + 4-byte extension pad
    put_i32(hdr.data(), 0, 348);
    put_i16(hdr.data(), kOffDim, 3);
    for (int d = 0; d < 3; ++d) put_i16(hdr.data(), kOffDim + 2 + 2 * std::size_t(d), std::int16_t(v.dims[std::size_t(d)]));
    for (int d = 4; d <= 7; ++d) put_i16(hdr.data(), kOffDim + 2 * std::size_t(d), 1);
    put_i16(hdr.data(), kOffDatatype, kDtFloat32);
    put_i16(hdr.data(), kOffBitpix, 32);
    // pixdim: qfac 1, then voxel sizes from affine column norms
    put_f32(hdr.data(), kOffPixdim, 1.0f);
    for (int col = 0; col < 3; ++col) {
        const double sz = std::sqrt(v.affine.at(0, col) * v.affine.at(0, col) +
                                    v.affine.at(1, col) * v.affine.at(1, col) +
                                    v.affine.at(2, col) * v.affine.at(2, col));
        put_f32(hdr.data(), kOffPixdim + 4 + 4 * std::size_t(col), float(sz));
    }
    put_f32(hdr.data(), kOffVoxOffset, float(kMinVoxOffset));
    put_f32(hdr.data(), kOffSclSlope, 1.0f);
    put_f32(hdr.data(), kOffSclInter, 0.0f);
    put_i16(hdr.data(), kOffQformCode, 0);
    put_i16(hdr.data(), kOffSformCode, 1);
    for (int row = 0; row < 3; ++row)
        for (int col = 0; col < 4; ++col)
            put_f32(hdr.data(), kOffSrowX + std::size_t(row) * 16 + std::size_t(col) * 4,
                    float(v.affine.at(row, col)));
    hdr[kOffMagic] = 'n';
    hdr[kOffMagic + 1] = '+';
    hdr[kOffMagic + 2] = '1';
    hdr[kOffMagic + 3] = '\0';

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(hdr.data()), std::streamsize(hdr.size()));
    std::vector<std::uint8_t> data(v.data.size() * 4);
    for (std::size_t i = 0; i < v.data.size(); ++i) put_f32(data.data(), i * 4, v.data[i]);
    out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    if (!out) throw Error(Errc::io_error, "write failed for " + path);
}

} // namespace pipecomm
