#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <variant>

#include "predformer/tensor.hpp"

namespace predformer {

// Self-describing binary tensor container, extension ".pfts".
//
//   magic   "PFTS"
//   version u16  (currently 1)
//   dtype   u8   (0 = f32, 1 = f64)
//   ndim    u8
//   dims    ndim x u32
//   payload row-major values, little-endian
//
// No alignment padding anywhere; read(write(t)) is bitwise identity.

inline constexpr uint16_t kTensorFileVersion = 1;
inline constexpr char kTensorFileMagic[4] = {'P', 'F', 'T', 'S'};

namespace detail {

template <typename U>
void write_le(std::ostream& os, U value) {
    static_assert(std::is_integral_v<U>);
    unsigned char bytes[sizeof(U)];
    for (size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <typename U>
U read_le(std::istream& is) {
    static_assert(std::is_integral_v<U>);
    unsigned char bytes[sizeof(U)];
    is.read(reinterpret_cast<char*>(bytes), sizeof(U));
    if (!is) throw IoError(IoError::Code::Truncated, "tensor file: truncated header");
    U value = 0;
    for (size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
    return value;
}

template <typename T>
void write_payload(std::ostream& os, std::span<const T> values) {
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(values.data()),
                 static_cast<std::streamsize>(values.size() * sizeof(T)));
    } else {
        using Bits = std::conditional_t<sizeof(T) == 4, uint32_t, uint64_t>;
        for (T v : values) write_le(os, std::bit_cast<Bits>(v));
    }
}

template <typename T>
void read_payload(std::istream& is, std::span<T> values) {
    if constexpr (std::endian::native == std::endian::little) {
        is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(T)));
        if (static_cast<size_t>(is.gcount()) != values.size() * sizeof(T)) {
            throw IoError(IoError::Code::Truncated, "tensor file: truncated payload");
        }
    } else {
        using Bits = std::conditional_t<sizeof(T) == 4, uint32_t, uint64_t>;
        for (T& v : values) {
            unsigned char bytes[sizeof(T)];
            is.read(reinterpret_cast<char*>(bytes), sizeof(T));
            if (!is) throw IoError(IoError::Code::Truncated, "tensor file: truncated payload");
            Bits b = 0;
            for (size_t i = 0; i < sizeof(T); ++i) b |= static_cast<Bits>(bytes[i]) << (8 * i);
            v = std::bit_cast<T>(b);
        }
    }
}

template <typename T>
constexpr uint8_t dtype_code() {
    if constexpr (std::is_same_v<T, float>) {
        return 0;
    } else {
        static_assert(std::is_same_v<T, double>, "tensor files hold f32 or f64");
        return 1;
    }
}

}  // namespace detail

template <typename T>
void write_tensor(std::ostream& os, const Tensor<T>& t) {
    os.write(kTensorFileMagic, 4);
    detail::write_le<uint16_t>(os, kTensorFileVersion);
    detail::write_le<uint8_t>(os, detail::dtype_code<T>());
    detail::write_le<uint8_t>(os, static_cast<uint8_t>(t.ndim()));
    for (int64_t i = 0; i < t.ndim(); ++i) detail::write_le<uint32_t>(os, static_cast<uint32_t>(t.dim(i)));
    detail::write_payload<T>(os, t.data());
    if (!os) throw IoError(IoError::Code::Unwritable, "tensor file: write failed");
}

template <typename T>
void save_tensor(const std::string& path, const Tensor<T>& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError(IoError::Code::Unwritable, "tensor file: cannot open '" + path + "' for writing");
    write_tensor(os, t);
}

struct TensorFileHeader {
    uint8_t dtype = 0;
    Shape shape;
};

inline TensorFileHeader read_tensor_header(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kTensorFileMagic, 4) != 0) {
        throw IoError(IoError::Code::BadMagic, "tensor file: bad magic");
    }
    const auto version = detail::read_le<uint16_t>(is);
    if (version != kTensorFileVersion) {
        throw IoError(IoError::Code::VersionMismatch,
                      "tensor file: unsupported version " + std::to_string(version));
    }
    TensorFileHeader h;
    h.dtype = detail::read_le<uint8_t>(is);
    if (h.dtype > 1) throw IoError(IoError::Code::BadHeader, "tensor file: unknown dtype code");
    const auto ndim = detail::read_le<uint8_t>(is);
    h.shape.resize(ndim);
    for (auto& d : h.shape) {
        d = detail::read_le<uint32_t>(is);
        if (d < 1) throw IoError(IoError::Code::BadHeader, "tensor file: zero-length axis");
    }
    return h;
}

template <typename T>
Tensor<T> read_tensor_as(std::istream& is) {
    const TensorFileHeader h = read_tensor_header(is);
    if (h.dtype != detail::dtype_code<T>()) {
        throw IoError(IoError::Code::BadHeader, "tensor file: dtype does not match the requested type");
    }
    Tensor<T> t(h.shape);
    detail::read_payload<T>(is, t.mut_data());
    return t;
}

template <typename T>
Tensor<T> load_tensor_as(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError(IoError::Code::Unreadable, "tensor file: cannot open '" + path + "'");
    return read_tensor_as<T>(is);
}

using LoadedTensor = std::variant<Tensor<float>, Tensor<double>>;

inline LoadedTensor load_tensor(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError(IoError::Code::Unreadable, "tensor file: cannot open '" + path + "'");
    const TensorFileHeader h = read_tensor_header(is);
    if (h.dtype == 0) {
        Tensor<float> t(h.shape);
        detail::read_payload<float>(is, t.mut_data());
        return t;
    }
    Tensor<double> t(h.shape);
    detail::read_payload<double>(is, t.mut_data());
    return t;
}

}  // namespace predformer
