#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "vld/matrix.hpp"

namespace vld {

// Trailer metadata carried alongside the float payload. `texts` is the
// per-row lookup key list for text caches; empty otherwise.
struct CacheMeta {
    std::string generator_id;
    std::vector<std::string> texts;
};

// Layout: magic "VLMD", u32 version, u64 N, u64 D, u8 kind, N*D f32
// little-endian row-major payload, then a UTF-8 trailer with the crc32 of
// the payload, the generator id, one id line per row and optional text
// lines. Values round-trip bit-exactly; endianness is fixed.
void cache_write(const FeatureMatrix& m, const CacheMeta& meta,
                 const std::filesystem::path& path);

std::pair<FeatureMatrix, CacheMeta> cache_read(const std::filesystem::path& path);

std::uint32_t crc32(const void* data, std::size_t size);

// One-line field escaping shared by the trailer, fixtures and manifests.
std::string escape_field(const std::string& s);
std::string unescape_field(const std::string& s);

}  // namespace vld
