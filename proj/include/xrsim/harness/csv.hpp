#pragma once

#include <zlib.h>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace xrsim {

/// RFC 4180 field: quoted when it holds a comma, quote, CR or LF.
inline std::string CsvField(std::string_view s)
{
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(s);
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

/// Shortest round-trip decimal form, so output bytes never depend on locale.
inline std::string FormatNumber(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) {
        throw std::runtime_error("number formatting failed");
    }
    return std::string(buf, end);
}

inline std::string FormatNumber(std::int64_t v) { return std::to_string(v); }
inline std::string FormatNumber(std::uint64_t v) { return std::to_string(v); }
inline std::string FormatNumber(int v) { return std::to_string(v); }

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : m_columns(header.size())
    {
        if (header.empty()) {
            throw std::invalid_argument("CSV header must not be empty");
        }
        AddRow(header);
    }

    void AddRow(const std::vector<std::string>& fields)
    {
        if (fields.size() != m_columns) {
            throw std::invalid_argument("CSV row has " + std::to_string(fields.size()) + " fields, expected "
                                        + std::to_string(m_columns));
        }
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) {
                m_text += ',';
            }
            m_text += CsvField(fields[i]);
        }
        m_text += "\r\n";
    }

    const std::string& Text() const { return m_text; }

private:
    std::size_t m_columns;
    std::string m_text;
};

inline void WriteFile(const std::filesystem::path& path, std::string_view content)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

/// gzip member with a zeroed header timestamp so the bytes are reproducible.
inline std::string GzipCompress(std::string_view data)
{
    z_stream zs{};
    if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        throw std::runtime_error("deflateInit2 failed");
    }
    std::string out;
    out.resize(deflateBound(&zs, static_cast<uLong>(data.size())) + 32);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) {
        throw std::runtime_error("gzip compression failed");
    }
    out.resize(zs.total_out);
    return out;
}

inline std::string GzipDecompress(std::string_view data)
{
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK) {
        throw std::runtime_error("inflateInit2 failed");
    }
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    std::string out;
    char buf[16384];
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof buf;
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw std::runtime_error("corrupt gzip stream");
        }
        out.append(buf, sizeof buf - zs.avail_out);
    }
    inflateEnd(&zs);
    return out;
}

} // namespace xrsim
