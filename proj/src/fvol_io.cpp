#include "fairal/fvol_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace fairal {

namespace {

void put_u32le(std::ostream& os, std::uint32_t v) {
    const unsigned char b[4] = {
        static_cast<unsigned char>(v & 0xff),
        static_cast<unsigned char>((v >> 8) & 0xff),
        static_cast<unsigned char>((v >> 16) & 0xff),
        static_cast<unsigned char>((v >> 24) & 0xff),
    };
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32le(std::ostream& os, float v) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
    put_u32le(os, bits);
}

float get_f32le(std::istream& is) {
    return std::bit_cast<float>(get_u32le(is));
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open for writing: " + path.string());
    return os;
}

void write_header(std::ostream& os, const VolumeShape& s, std::uint8_t dtype) {
    os.write(reinterpret_cast<const char*>(kFvolMagic), 8);
    put_u32le(os, s.nx);
    put_u32le(os, s.ny);
    put_u32le(os, s.nz);
    const char t = static_cast<char>(dtype);
    os.write(&t, 1);
}

VolumeShape read_header(std::istream& is, const std::filesystem::path& path, std::uint8_t expect_dtype) {
    unsigned char magic[8];
    is.read(reinterpret_cast<char*>(magic), 8);
    if (!is || std::memcmp(magic, kFvolMagic, 8) != 0) {
        throw DataError("not an FVOL1 file: " + path.string());
    }
    VolumeShape s;
    s.nx = get_u32le(is);
    s.ny = get_u32le(is);
    s.nz = get_u32le(is);
    char t = 0;
    is.read(&t, 1);
    if (!is) throw DataError("truncated FVOL1 header: " + path.string());
    if (static_cast<std::uint8_t>(t) != expect_dtype) {
        throw DataError("FVOL1 dtype mismatch in " + path.string());
    }
    s.validate();
    return s;
}

} // namespace

void write_fvol(const std::filesystem::path& path, const ScalarVolume& vol) {
    vol.validate();
    auto os = open_out(path);
    write_header(os, vol.shape, kFvolDtypeF32);
    for (double v : vol.data) put_f32le(os, static_cast<float>(v));
    if (!os) throw DataError("write failed: " + path.string());
}

void write_fvol(const std::filesystem::path& path, const ProbabilityVolume& vol) {
    vol.validate();
    auto os = open_out(path);
    write_header(os, vol.shape, kFvolDtypeF32);
    for (double v : vol.data) put_f32le(os, static_cast<float>(v));
    if (!os) throw DataError("write failed: " + path.string());
}

void write_fvol(const std::filesystem::path& path, const BinaryMask& mask) {
    mask.validate();
    auto os = open_out(path);
    write_header(os, mask.shape, kFvolDtypeU8);
    os.write(reinterpret_cast<const char*>(mask.data.data()),
             static_cast<std::streamsize>(mask.data.size()));
    if (!os) throw DataError("write failed: " + path.string());
}

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path.string());
    return is;
}

std::vector<double> read_f32_payload(std::istream& is, std::size_t n, const std::filesystem::path& path) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = static_cast<double>(get_f32le(is));
        if (!is) throw DataError("truncated FVOL1 payload: " + path.string());
    }
    return out;
}

} // namespace

ScalarVolume read_fvol_scalar(const std::filesystem::path& path) {
    auto is = open_in(path);
    const VolumeShape s = read_header(is, path, kFvolDtypeF32);
    ScalarVolume vol{s, read_f32_payload(is, s.total(), path)};
    vol.validate();
    return vol;
}

ProbabilityVolume read_fvol_probability(const std::filesystem::path& path) {
    auto is = open_in(path);
    const VolumeShape s = read_header(is, path, kFvolDtypeF32);
    ProbabilityVolume vol{s, read_f32_payload(is, s.total(), path)};
    vol.validate();
    return vol;
}

BinaryMask read_fvol_mask(const std::filesystem::path& path) {
    auto is = open_in(path);
    const VolumeShape s = read_header(is, path, kFvolDtypeU8);
    BinaryMask mask{s, std::vector<std::uint8_t>(s.total())};
    is.read(reinterpret_cast<char*>(mask.data.data()), static_cast<std::streamsize>(mask.data.size()));
    if (!is) throw DataError("truncated FVOL1 payload: " + path.string());
    for (auto& v : mask.data) v = v ? 1 : 0;
    return mask;
}

} // namespace fairal
