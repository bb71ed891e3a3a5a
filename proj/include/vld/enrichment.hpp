#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vld/errors.hpp"

namespace vld {

// CLIP text encoders cap sequences at 77 tokens.
inline constexpr std::size_t kTokenLimit = 77;

enum class PromptStyle { plain, original, succinct, detailed, distinct };

const char* style_name(PromptStyle style);
PromptStyle style_from_name(std::string_view name);

// LLM instruction template for a style; empty for plain.
std::string_view prompt_template(PromptStyle style);

// Template with {cls} substituted.
std::string instruction_for(PromptStyle style, std::string_view label);

// Append-only on-disk store of generated label descriptions, keyed by
// (label, style, generator-id). A key is never overwritten silently.
class DescriptionCache {
public:
    struct Entry {
        std::string label;
        std::string style;
        std::string generator_id;
        std::int64_t timestamp = 0;
        std::string description;
    };

    DescriptionCache() = default;
    static DescriptionCache open(const std::filesystem::path& path);

    // First entry for (label, style) in insertion order; null if absent.
    const std::string* find(std::string_view label, std::string_view style) const;
    const std::string* find_exact(std::string_view label, std::string_view style,
                                  std::string_view generator_id) const;

    // Appends and persists. Re-putting an identical record is a no-op;
    // a different description for an existing key throws DuplicateKey.
    void put(const std::string& label, const std::string& style,
             const std::string& generator_id, const std::string& description);

    std::size_t size() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }

private:
    std::vector<Entry> entries_;
    std::filesystem::path path_;
};

// Map sample-id -> caption text; at most one caption per sample.
struct CaptionSet {
    std::map<std::string, std::string> captions;

    void save(const std::filesystem::path& path) const;
    static CaptionSet load(const std::filesystem::path& path);
};

// Pluggable text-generation transport (LLM or captioner).
class TextGenClient {
public:
    virtual ~TextGenClient() = default;
    virtual std::string id() const = 0;
    virtual std::string generate(const std::string& request) = 0;
};

// Replays a recorded request -> response table from a plain-text file.
class FixtureClient : public TextGenClient {
public:
    explicit FixtureClient(const std::filesystem::path& table_path);

    std::string id() const override { return id_; }
    std::string generate(const std::string& request) override;
    std::size_t calls() const { return calls_; }

private:
    std::map<std::string, std::string> table_;
    std::string id_;
    std::size_t calls_ = 0;
};

// POSTs the request to an HTTP endpoint and returns the response body.
class HttpTextGenClient : public TextGenClient {
public:
    // endpoint like "http://host:port/generate".
    explicit HttpTextGenClient(std::string endpoint);

    std::string id() const override { return "http:" + endpoint_; }
    std::string generate(const std::string& request) override;

private:
    std::string endpoint_;
};

// Reads VLD_FIXTURE (fixture table path) or VLD_LLM_ENDPOINT.
std::unique_ptr<TextGenClient> client_from_env();

// l(y) = prompt + description(y). Plain style needs no cache entry;
// enriched styles throw MissingDescription when the cache has none.
// Output is truncated to token_limit tokens, description tail first.
std::string build_label_text(const std::string& label, PromptStyle style,
                             const DescriptionCache& cache,
                             std::size_t token_limit = kTokenLimit);

// One description per (label, style, client-id); cache hits make no client
// call. Returns the number of client calls made.
std::size_t generate_descriptions(std::span<const std::string> labels, PromptStyle style,
                                  TextGenClient& client, DescriptionCache& cache);

// One caption per sample id, requested by sample id; present ids are left
// unchanged. Returns the number of client calls made.
std::size_t generate_captions(std::span<const std::string> sample_ids,
                              TextGenClient& captioner, CaptionSet& captions);

}  // namespace vld
