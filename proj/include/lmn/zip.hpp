#pragma once

// Minimal ZIP (PKWARE APPNOTE 6.3) writer and reader for uncompressed entries.
// Written archives are deterministic: fixed 1980-01-01 00:00 DOS timestamps,
// caller-given entry order, UTF-8 name flag set, no extra fields.

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lmn::zip {

class ZipError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Entry {
    std::string name;
    std::string data;

    friend bool operator==(const Entry&, const Entry&) = default;
};

namespace detail {

inline constexpr std::uint32_t kLocalSig = 0x04034b50;
inline constexpr std::uint32_t kCentralSig = 0x02014b50;
inline constexpr std::uint32_t kEndSig = 0x06054b50;
inline constexpr std::uint16_t kVersion = 20;
inline constexpr std::uint16_t kUtf8Flag = 1u << 11;
inline constexpr std::uint16_t kDosTime = 0;
inline constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;  // 1980-01-01

inline void put16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void put32(std::string& out, std::uint32_t v) {
    put16(out, static_cast<std::uint16_t>(v & 0xFFFF));
    put16(out, static_cast<std::uint16_t>(v >> 16));
}

inline std::uint16_t get16(std::string_view in, std::size_t at) {
    if (at + 2 > in.size()) throw ZipError("truncated archive");
    return static_cast<std::uint16_t>(static_cast<unsigned char>(in[at]) |
                                      (static_cast<unsigned char>(in[at + 1]) << 8));
}

inline std::uint32_t get32(std::string_view in, std::size_t at) {
    return static_cast<std::uint32_t>(get16(in, at)) | (static_cast<std::uint32_t>(get16(in, at + 2)) << 16);
}

} // namespace detail

inline std::uint32_t crc32_of(std::string_view data) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    std::size_t off = 0;
    // zlib takes uInt lengths
    while (off < data.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(data.size() - off, 1u << 30));
        crc = ::crc32(crc, reinterpret_cast<const Bytef*>(data.data() + off), chunk);
        off += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

inline std::string write_archive(const std::vector<Entry>& entries) {
    using namespace detail;
    if (entries.size() > 0xFFFF) throw ZipError("too many entries");
    std::string out;
    std::string central;
    for (const auto& e : entries) {
        if (e.name.empty() || e.name.size() > 0xFFFF) throw ZipError("invalid entry name");
        for (const auto* prev = entries.data(); prev != &e; ++prev)
            if (prev->name == e.name) throw ZipError("duplicate entry name '" + e.name + "'");
        if (e.data.size() > 0xFFFFFFFEu || out.size() > 0xFFFFFFFEu) throw ZipError("archive exceeds 4 GiB");
        const auto crc = crc32_of(e.data);
        const auto size = static_cast<std::uint32_t>(e.data.size());
        const auto offset = static_cast<std::uint32_t>(out.size());

        put32(out, kLocalSig);
        put16(out, kVersion);
        put16(out, kUtf8Flag);
        put16(out, 0);  // stored
        put16(out, kDosTime);
        put16(out, kDosDate);
        put32(out, crc);
        put32(out, size);
        put32(out, size);
        put16(out, static_cast<std::uint16_t>(e.name.size()));
        put16(out, 0);
        out += e.name;
        out += e.data;

        put32(central, kCentralSig);
        put16(central, kVersion);  // made by
        put16(central, kVersion);  // needed
        put16(central, kUtf8Flag);
        put16(central, 0);
        put16(central, kDosTime);
        put16(central, kDosDate);
        put32(central, crc);
        put32(central, size);
        put32(central, size);
        put16(central, static_cast<std::uint16_t>(e.name.size()));
        put16(central, 0);  // extra
        put16(central, 0);  // comment
        put16(central, 0);  // disk
        put16(central, 0);  // internal attrs
        put32(central, 0);  // external attrs
        put32(central, offset);
        central += e.name;
    }
    const auto cd_offset = static_cast<std::uint32_t>(out.size());
    out += central;
    put32(out, kEndSig);
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<std::uint16_t>(entries.size()));
    put16(out, static_cast<std::uint16_t>(entries.size()));
    put32(out, static_cast<std::uint32_t>(central.size()));
    put32(out, cd_offset);
    put16(out, 0);
    return out;
}

/// Reads an archive through its central directory. Only stored entries are
/// supported; CRCs are verified.
inline std::vector<Entry> read_archive(std::string_view in) {
    using namespace detail;
    if (in.size() < 22) throw ZipError("not a zip archive");
    std::size_t eocd = std::string_view::npos;
    const std::size_t lowest = in.size() > 22 + 0xFFFF ? in.size() - 22 - 0xFFFF : 0;
    for (std::size_t pos = in.size() - 22 + 1; pos-- > lowest;) {
        if (get32(in, pos) == kEndSig) {
            eocd = pos;
            break;
        }
    }
    if (eocd == std::string_view::npos) throw ZipError("end of central directory not found");
    const auto count = get16(in, eocd + 10);
    std::size_t cd = get32(in, eocd + 16);

    std::vector<Entry> entries;
    for (std::uint16_t i = 0; i < count; ++i) {
        if (get32(in, cd) != kCentralSig) throw ZipError("bad central directory entry");
        const auto method = get16(in, cd + 10);
        const auto crc = get32(in, cd + 16);
        const auto csize = get32(in, cd + 20);
        const auto usize = get32(in, cd + 24);
        const auto name_len = get16(in, cd + 28);
        const auto extra_len = get16(in, cd + 30);
        const auto comment_len = get16(in, cd + 32);
        const auto local = get32(in, cd + 42);
        if (cd + 46 + name_len > in.size()) throw ZipError("truncated archive");
        Entry e;
        e.name = std::string(in.substr(cd + 46, name_len));
        if (method != 0 || csize != usize) throw ZipError("entry '" + e.name + "' is compressed; only stored entries are supported");
        if (get32(in, local) != kLocalSig) throw ZipError("bad local header for '" + e.name + "'");
        const std::size_t data_at = local + 30 + get16(in, local + 26) + get16(in, local + 28);
        if (data_at + csize > in.size()) throw ZipError("truncated data for '" + e.name + "'");
        e.data = std::string(in.substr(data_at, csize));
        if (crc32_of(e.data) != crc) throw ZipError("crc mismatch for '" + e.name + "'");
        entries.push_back(std::move(e));
        cd += 46 + name_len + extra_len + comment_len;
    }
    return entries;
}

} // namespace lmn::zip
