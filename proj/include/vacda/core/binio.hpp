#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "vacda/core/errors.hpp"

namespace vacda::binio {

// Explicit little-endian encoding, independent of host byte order.

inline void put_u32(std::ostream& os, std::uint32_t x) {
    unsigned char b[4] = {static_cast<unsigned char>(x & 0xff),
                          static_cast<unsigned char>((x >> 8) & 0xff),
                          static_cast<unsigned char>((x >> 16) & 0xff),
                          static_cast<unsigned char>((x >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& os, std::uint64_t x) {
    put_u32(os, static_cast<std::uint32_t>(x & 0xffffffffULL));
    put_u32(os, static_cast<std::uint32_t>(x >> 32));
}

inline void put_u16(std::ostream& os, std::uint16_t x) {
    unsigned char b[2] = {static_cast<unsigned char>(x & 0xff),
                          static_cast<unsigned char>((x >> 8) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

inline void put_f32(std::ostream& os, float x) {
    std::uint32_t u;
    std::memcpy(&u, &x, 4);
    put_u32(os, u);
}

inline std::uint32_t get_u32(std::istream& is, const char* what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw DataError(std::string("truncated read of ") + what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t get_u64(std::istream& is, const char* what) {
    std::uint64_t lo = get_u32(is, what);
    std::uint64_t hi = get_u32(is, what);
    return lo | (hi << 32);
}

inline std::uint16_t get_u16(std::istream& is, const char* what) {
    unsigned char b[2];
    if (!is.read(reinterpret_cast<char*>(b), 2))
        throw DataError(std::string("truncated read of ") + what);
    return static_cast<std::uint16_t>(static_cast<std::uint16_t>(b[0]) |
                                      (static_cast<std::uint16_t>(b[1]) << 8));
}

inline float get_f32(std::istream& is, const char* what) {
    std::uint32_t u = get_u32(is, what);
    float x;
    std::memcpy(&x, &u, 4);
    return x;
}

inline void put_f32_array(std::ostream& os, const float* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) put_f32(os, p[i]);
}

inline void get_f32_array(std::istream& is, float* p, std::size_t n, const char* what) {
    for (std::size_t i = 0; i < n; ++i) p[i] = get_f32(is, what);
}

inline void put_string(std::ostream& os, const std::string& s) {
    put_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& is, const char* what) {
    std::uint32_t n = get_u32(is, what);
    std::string s(n, '\0');
    if (n && !is.read(s.data(), n))
        throw DataError(std::string("truncated read of ") + what);
    return s;
}

}  // namespace vacda::binio
