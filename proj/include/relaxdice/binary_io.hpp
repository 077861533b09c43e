#pragma once

#include <bit>
#include <cstdint>
#include <type_traits>
#include <utility>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "relaxdice/errors.hpp"

namespace relaxdice {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

/// Little-endian byte sink used by every on-disk format in the library.
class ByteWriter {
public:
    template <class T>
    void put(T value) {
        static_assert(std::is_arithmetic_v<T>);
        unsigned char raw[sizeof(T)];
        std::memcpy(raw, &value, sizeof(T));
        if constexpr (std::endian::native == std::endian::big)
            for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(raw[i], raw[sizeof(T) - 1 - i]);
        bytes_.insert(bytes_.end(), raw, raw + sizeof(T));
    }
    void put_bytes(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

    const std::vector<unsigned char>& bytes() const { return bytes_; }
    std::vector<unsigned char> take() { return std::move(bytes_); }

private:
    std::vector<unsigned char> bytes_;
};

/// Bounds-checked little-endian reader; running off the end throws FormatError.
class ByteReader {
public:
    ByteReader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

    template <class T>
    T get() {
        static_assert(std::is_arithmetic_v<T>);
        require(sizeof(T));
        unsigned char raw[sizeof(T)];
        std::memcpy(raw, data_ + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big)
            for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(raw[i], raw[sizeof(T) - 1 - i]);
        pos_ += sizeof(T);
        T value;
        std::memcpy(&value, raw, sizeof(T));
        return value;
    }
    std::string get_bytes(std::size_t n) {
        require(n);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }
    /// Throws unless at least n more bytes are available.
    void require(std::size_t n) const {
        if (n > size_ - pos_) throw FormatError("truncated input");
    }
    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return size_ - pos_; }

private:
    const unsigned char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

std::vector<unsigned char> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<unsigned char>& bytes);

/// CRC-32 (IEEE 802.3 polynomial) of a byte range.
std::uint32_t crc32_of(const unsigned char* data, std::size_t size);

}  // namespace relaxdice
