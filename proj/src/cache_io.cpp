#include "vld/cache_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

namespace vld {

namespace {

constexpr char kMagic[4] = {'V', 'L', 'M', 'D'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

const std::array<std::uint32_t, 256>& crc_table() {
    static const std::array<std::uint32_t, 256> table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int j = 0; j < 8; ++j) c = (c & 1) ? (0xEDB88320u ^ (c >> 1)) : (c >> 1);
            t[i] = c;
        }
        return t;
    }();
    return table;
}

}  // namespace

std::uint32_t crc32(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint32_t c = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < size; ++i) c = crc_table()[(c ^ p[i]) & 0xff] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

std::string escape_field(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string unescape_field(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 == s.size()) {
            out.push_back(s[i]);
            continue;
        }
        switch (s[++i]) {
            case '\\': out.push_back('\\'); break;
            case 'n': out.push_back('\n'); break;
            case 'r': out.push_back('\r'); break;
            case 't': out.push_back('\t'); break;
            default: out.push_back(s[i]);
        }
    }
    return out;
}

void cache_write(const FeatureMatrix& m, const CacheMeta& meta,
                 const std::filesystem::path& path) {
    m.validate_ids();
    if (!meta.texts.empty() && meta.texts.size() != m.rows())
        throw Error(ErrorCode::ShapeMismatch, "text count != rows");

    std::string payload;
    payload.reserve(m.rows() * m.dim() * 4);
    for (double v : m.values.data) put_f32(payload, static_cast<float>(v));

    std::ostringstream trailer;
    char hex[16];
    std::snprintf(hex, sizeof(hex), "%08x", crc32(payload.data(), payload.size()));
    trailer << "checksum " << hex << "\n";
    trailer << "generator " << escape_field(meta.generator_id) << "\n";
    for (const auto& id : m.ids) trailer << "id " << escape_field(id) << "\n";
    for (const auto& t : meta.texts) trailer << "text " << escape_field(t) << "\n";
    trailer << "end\n";

    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::InputMissing, "cannot open " + tmp.string());
        out.write(kMagic, 4);
        std::string header;
        put_u32(header, kVersion);
        put_u64(header, m.rows());
        put_u64(header, m.dim());
        header.push_back(static_cast<char>(static_cast<std::uint8_t>(m.kind)));
        out.write(header.data(), static_cast<std::streamsize>(header.size()));
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        const std::string t = trailer.str();
        out.write(t.data(), static_cast<std::streamsize>(t.size()));
        if (!out) throw Error(ErrorCode::InputMissing, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::pair<FeatureMatrix, CacheMeta> cache_read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InputMissing, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (bytes.size() < 4 + 4 + 8 + 8 + 1)
        throw Error(ErrorCode::CacheCorrupt, "file too short: " + path.string());
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw Error(ErrorCode::CacheCorrupt, "bad magic in " + path.string());

    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    std::uint32_t version = get_u32(p + 4);
    if (version != kVersion)
        throw Error(ErrorCode::VersionUnsupported, "version " + std::to_string(version));
    std::uint64_t n = get_u64(p + 8);
    std::uint64_t d = get_u64(p + 16);
    std::uint8_t kind_byte = p[24];

    const std::size_t payload_off = 25;
    const std::size_t payload_len = static_cast<std::size_t>(n) * static_cast<std::size_t>(d) * 4;
    if (bytes.size() < payload_off + payload_len)
        throw Error(ErrorCode::CacheCorrupt, "truncated payload in " + path.string());

    FeatureMatrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(d),
                    feature_kind_from_u8(kind_byte));
    for (std::size_t i = 0; i < n * d; ++i) {
        std::uint32_t bits = get_u32(p + payload_off + i * 4);
        float f;
        std::memcpy(&f, &bits, 4);
        m.values.data[i] = static_cast<double>(f);
    }

    std::uint32_t actual = crc32(bytes.data() + payload_off, payload_len);

    std::istringstream trailer(bytes.substr(payload_off + payload_len));
    CacheMeta meta;
    std::vector<std::string> ids;
    std::string line;
    bool saw_checksum = false, saw_end = false;
    while (std::getline(trailer, line)) {
        if (line == "end") {
            saw_end = true;
            break;
        }
        auto sp = line.find(' ');
        std::string key = line.substr(0, sp);
        std::string val = sp == std::string::npos ? "" : line.substr(sp + 1);
        if (key == "checksum") {
            saw_checksum = true;
            char hex[16];
            std::snprintf(hex, sizeof(hex), "%08x", actual);
            if (val != hex)
                throw Error(ErrorCode::CacheCorrupt, "checksum mismatch in " + path.string());
        } else if (key == "generator") {
            meta.generator_id = unescape_field(val);
        } else if (key == "id") {
            ids.push_back(unescape_field(val));
        } else if (key == "text") {
            meta.texts.push_back(unescape_field(val));
        } else {
            throw Error(ErrorCode::CacheCorrupt, "unknown trailer key '" + key + "'");
        }
    }
    if (!saw_checksum || !saw_end)
        throw Error(ErrorCode::CacheCorrupt, "incomplete trailer in " + path.string());
    if (ids.size() != m.rows())
        throw Error(ErrorCode::CacheCorrupt, "id count != rows in " + path.string());
    if (!meta.texts.empty() && meta.texts.size() != m.rows())
        throw Error(ErrorCode::CacheCorrupt, "text count != rows in " + path.string());
    m.ids = std::move(ids);
    return {std::move(m), std::move(meta)};
}

}  // namespace vld
