#pragma once

// Little-endian encoding shared by the descriptor, codebook, PCA and index
// file formats. Internal to the library.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

#include "rsir/error.hpp"

namespace rsir::io {

class ByteWriter {
public:
    void bytes(std::string_view raw) { buf_.append(raw); }

    template <typename T>
        requires std::is_arithmetic_v<T>
    void put(T value) {
        using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
                  std::conditional_t<sizeof(T) == 2, std::uint16_t,
                  std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
        auto bits = std::bit_cast<U>(value);
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            buf_.push_back(static_cast<char>(bits & 0xFFu));
            bits = static_cast<U>(bits >> 8);
        }
    }

    template <typename T>
    void put_all(std::span<const T> values) {
        if constexpr (std::endian::native == std::endian::little) {
            buf_.append(reinterpret_cast<const char*>(values.data()), values.size_bytes());
        } else {
            for (T v : values) put(v);
        }
    }

    const std::string& buffer() const noexcept { return buf_; }

private:
    std::string buf_;
};

class ByteReader {
public:
    ByteReader(std::string data, std::string source)
        : data_(std::move(data)), source_(std::move(source)) {}

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    const std::string& source() const noexcept { return source_; }

    void expect_magic(std::string_view magic) {
        require(magic.size(), "magic header");
        if (std::string_view(data_).substr(pos_, magic.size()) != magic) {
            fail(ErrorKind::Format, source_ + ": bad magic at byte offset " + std::to_string(pos_) +
                                        " (expected \"" + std::string(magic) + "\")");
        }
        pos_ += magic.size();
    }

    template <typename T>
        requires std::is_arithmetic_v<T>
    T get(std::string_view what) {
        using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
                  std::conditional_t<sizeof(T) == 2, std::uint16_t,
                  std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
        require(sizeof(T), what);
        U bits = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            bits |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i));
        }
        pos_ += sizeof(T);
        return std::bit_cast<T>(bits);
    }

    template <typename T>
    void get_all(std::span<T> out, std::string_view what) {
        require(out.size_bytes(), what);
        if constexpr (std::endian::native == std::endian::little) {
            std::memcpy(out.data(), data_.data() + pos_, out.size_bytes());
            pos_ += out.size_bytes();
        } else {
            for (T& v : out) v = get<T>(what);
        }
    }

    std::string get_string(std::size_t length, std::string_view what) {
        require(length, what);
        std::string s = data_.substr(pos_, length);
        pos_ += length;
        return s;
    }

    void expect_end() const {
        if (pos_ != data_.size()) {
            fail(ErrorKind::Format, source_ + ": " + std::to_string(data_.size() - pos_) +
                                        " trailing bytes at byte offset " + std::to_string(pos_));
        }
    }

    void require(std::size_t n, std::string_view what) const {
        if (remaining() < n) {
            fail(ErrorKind::Format, source_ + ": truncated " + std::string(what) +
                                        " at byte offset " + std::to_string(pos_) + " (need " +
                                        std::to_string(n) + " bytes, have " +
                                        std::to_string(remaining()) + ")");
        }
    }

private:
    std::string data_;
    std::string source_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace rsir::io
