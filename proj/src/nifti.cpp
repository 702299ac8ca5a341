#include "airquant/nifti.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace airquant {

namespace {

// Field offsets within the 348-byte NIfTI-1 header.
constexpr int kHeaderSize = 348;
constexpr long kDataOffset = 352;  // header + 4-byte extension pad

constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtFloat32 = 16;

template <typename T>
T read_le(const unsigned char* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;  // host assumed little-endian (x86/arm64)
}

template <typename T>
void write_le(unsigned char* p, T v) {
    std::memcpy(p, &v, sizeof(T));
}

std::int16_t dtype_code(DType t) {
    switch (t) {
        case DType::U8: return kDtUint8;
        case DType::I16: return kDtInt16;
        case DType::F32: return kDtFloat32;
    }
    return 0;
}

}  // namespace

VoxelGrid read_nifti(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open NIfTI file: " + path);

    unsigned char hdr[kHeaderSize];
    in.read(reinterpret_cast<char*>(hdr), kHeaderSize);
    if (in.gcount() != kHeaderSize)
        throw TruncatedFileError("NIfTI header shorter than 348 bytes: " + path);

    if (std::memcmp(hdr + 344, "n+1\0", 4) != 0)
        throw BadMagicError("bad NIfTI magic (expected \"n+1\"): " + path);

    const auto sizeof_hdr = read_le<std::int32_t>(hdr + 0);
    if (sizeof_hdr != kHeaderSize)
        throw FormatError("unexpected sizeof_hdr in NIfTI header: " + path);

    const auto datatype = read_le<std::int16_t>(hdr + 70);
    DType dt;
    switch (datatype) {
        case kDtUint8: dt = DType::U8; break;
        case kDtInt16: dt = DType::I16; break;
        case kDtFloat32: dt = DType::F32; break;
        default:
            throw UnsupportedDtypeError("unsupported NIfTI datatype code " +
                                        std::to_string(datatype) + ": " + path);
    }

    Index3 dims;
    for (int i = 0; i < 3; ++i)
        dims[i] = read_le<std::int16_t>(hdr + 40 + 2 * (i + 1));
    Vec3 spacing, origin;
    for (int i = 0; i < 3; ++i)
        spacing[i] = read_le<float>(hdr + 76 + 4 * (i + 1));
    origin[0] = read_le<float>(hdr + 268);
    origin[1] = read_le<float>(hdr + 272);
    origin[2] = read_le<float>(hdr + 276);

    const float vox_offset = read_le<float>(hdr + 108);
    const float scl_slope = read_le<float>(hdr + 112);
    const float scl_inter = read_le<float>(hdr + 116);

    VoxelGrid grid(dims, spacing, origin, dt);

    const std::size_t n = grid.voxel_count();
    const std::size_t elem = dtype_size(dt);
    const long offset = vox_offset >= kDataOffset
                            ? static_cast<long>(vox_offset)
                            : kDataOffset;
    in.seekg(offset, std::ios::beg);
    std::vector<unsigned char> raw(n * elem);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw TruncatedFileError("NIfTI data section shorter than dims imply: " + path);

    switch (dt) {
        case DType::U8:
            for (std::size_t i = 0; i < n; ++i) grid.data[i] = raw[i];
            break;
        case DType::I16:
            for (std::size_t i = 0; i < n; ++i)
                grid.data[i] = read_le<std::int16_t>(raw.data() + 2 * i);
            break;
        case DType::F32:
            for (std::size_t i = 0; i < n; ++i)
                grid.data[i] = read_le<float>(raw.data() + 4 * i);
            break;
    }

    if (scl_slope != 0.0f && !(scl_slope == 1.0f && scl_inter == 0.0f)) {
        for (auto& v : grid.data) v = v * scl_slope + scl_inter;
        grid.dtype = DType::F32;  // scaled values are no longer the raw integers
    }
    return grid;
}

void write_nifti(const VoxelGrid& grid, const std::string& path) {
    grid.validate();

    unsigned char hdr[kHeaderSize];
    std::memset(hdr, 0, sizeof(hdr));

    write_le<std::int32_t>(hdr + 0, kHeaderSize);
    hdr[38] = 'r';  // regular

    write_le<std::int16_t>(hdr + 40, 3);  // dim[0]
    for (int i = 0; i < 3; ++i)
        write_le<std::int16_t>(hdr + 40 + 2 * (i + 1),
                               static_cast<std::int16_t>(grid.dims[i]));
    for (int i = 4; i < 8; ++i) write_le<std::int16_t>(hdr + 40 + 2 * i, 1);

    write_le<std::int16_t>(hdr + 70, dtype_code(grid.dtype));
    write_le<std::int16_t>(hdr + 72,
                           static_cast<std::int16_t>(8 * dtype_size(grid.dtype)));

    write_le<float>(hdr + 76, 1.0f);  // pixdim[0] = qfac
    for (int i = 0; i < 3; ++i)
        write_le<float>(hdr + 76 + 4 * (i + 1), static_cast<float>(grid.spacing[i]));

    write_le<float>(hdr + 108, static_cast<float>(kDataOffset));
    write_le<float>(hdr + 112, 1.0f);  // scl_slope
    write_le<float>(hdr + 116, 0.0f);  // scl_inter

    write_le<std::int16_t>(hdr + 252, 1);  // qform_code = scanner
    write_le<std::int16_t>(hdr + 254, 0);  // sform unused
    // identity quaternion: b = c = d = 0
    write_le<float>(hdr + 268, static_cast<float>(grid.origin[0]));
    write_le<float>(hdr + 272, static_cast<float>(grid.origin[1]));
    write_le<float>(hdr + 276, static_cast<float>(grid.origin[2]));

    std::memcpy(hdr + 344, "n+1\0", 4);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(hdr), kHeaderSize);
    const unsigned char pad[4] = {0, 0, 0, 0};
    out.write(reinterpret_cast<const char*>(pad), 4);

    const std::size_t n = grid.voxel_count();
    std::vector<unsigned char> raw(n * dtype_size(grid.dtype));
    switch (grid.dtype) {
        case DType::U8:
            for (std::size_t i = 0; i < n; ++i)
                raw[i] = static_cast<std::uint8_t>(grid.data[i]);
            break;
        case DType::I16:
            for (std::size_t i = 0; i < n; ++i)
                write_le<std::int16_t>(raw.data() + 2 * i,
                                       static_cast<std::int16_t>(grid.data[i]));
            break;
        case DType::F32:
            for (std::size_t i = 0; i < n; ++i)
                write_le<float>(raw.data() + 4 * i, grid.data[i]);
            break;
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError("short write: " + path);
}

void write_nifti(const Mask& mask, const std::string& path) {
    write_nifti(mask_to_grid(mask), path);
}

void write_nifti(const LabelMap& labels, const std::string& path) {
    write_nifti(labels_to_grid(labels), path);
}

Mask to_mask(const VoxelGrid& g) {
    Mask m(g.dims, g.spacing, g.origin);
    for (std::size_t i = 0; i < g.data.size(); ++i) {
        const float v = g.data[i];
        if (v != 0.0f && v != 1.0f)
            throw GeometryError("grid is not binary, cannot convert to Mask");
        m.data[i] = v != 0.0f ? 1 : 0;
    }
    return m;
}

LabelMap to_labels(const VoxelGrid& g) {
    LabelMap l(g.dims, g.spacing, g.origin);
    for (std::size_t i = 0; i < g.data.size(); ++i)
        l.data[i] = static_cast<std::int16_t>(g.data[i]);
    return l;
}

VoxelGrid mask_to_grid(const Mask& m) {
    VoxelGrid g(m.dims, m.spacing, m.origin, DType::U8);
    for (std::size_t i = 0; i < m.data.size(); ++i) g.data[i] = m.data[i];
    return g;
}

VoxelGrid labels_to_grid(const LabelMap& l) {
    VoxelGrid g(l.dims, l.spacing, l.origin, DType::I16);
    for (std::size_t i = 0; i < l.data.size(); ++i) g.data[i] = l.data[i];
    return g;
}

}  // namespace airquant
