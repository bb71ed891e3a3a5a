#include "vld/enrichment.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "vld/cache_io.hpp"
#include "vld/tokens.hpp"

namespace vld {

namespace {

constexpr std::string_view kOriginal =
    "Use a single sentence to describe the appearance and shape of {cls}. Only describe "
    "the shape and appearance.";
constexpr std::string_view kSuccinct =
    "Use a single sentence to broadly describe the appearance and shape of {cls}. Don't "
    "give too much details. Only describe the shape and appearance.";
constexpr std::string_view kDetailed =
    "Use a single sentence and short, simple, descriptive phrases to describe the detailed "
    "appearance and detailed shape of {cls}.";
constexpr std::string_view kDistinct =
    "Use a single sentence to describe the unique, distinctive appearance and shape of "
    "{cls}. Only describe the unique, distinctive shape and appearance.";

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '\t') {
            fields.push_back(unescape_field(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return fields;
}

}  // namespace

const char* style_name(PromptStyle style) {
    switch (style) {
        case PromptStyle::plain: return "plain";
        case PromptStyle::original: return "original";
        case PromptStyle::succinct: return "succinct";
        case PromptStyle::detailed: return "detailed";
        case PromptStyle::distinct: return "distinct";
    }
    return "plain";
}

PromptStyle style_from_name(std::string_view name) {
    if (name == "plain") return PromptStyle::plain;
    if (name == "original") return PromptStyle::original;
    if (name == "succinct") return PromptStyle::succinct;
    if (name == "detailed") return PromptStyle::detailed;
    if (name == "distinct") return PromptStyle::distinct;
    throw Error(ErrorCode::ConfigInvalid, "unknown prompt style '" + std::string(name) + "'");
}

std::string_view prompt_template(PromptStyle style) {
    switch (style) {
        case PromptStyle::plain: return {};
        case PromptStyle::original: return kOriginal;
        case PromptStyle::succinct: return kSuccinct;
        case PromptStyle::detailed: return kDetailed;
        case PromptStyle::distinct: return kDistinct;
    }
    return {};
}

std::string instruction_for(PromptStyle style, std::string_view label) {
    std::string_view tpl = prompt_template(style);
    if (tpl.empty())
        throw Error(ErrorCode::ConfigInvalid, "plain style has no LLM instruction");
    std::string out(tpl);
    const std::string placeholder = "{cls}";
    std::size_t pos;
    while ((pos = out.find(placeholder)) != std::string::npos)
        out.replace(pos, placeholder.size(), label);
    return out;
}

DescriptionCache DescriptionCache::open(const std::filesystem::path& path) {
    DescriptionCache cache;
    cache.path_ = path;
    std::ifstream in(path);
    if (!in) return cache;  // fresh cache
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != 5)
            throw Error(ErrorCode::CacheCorrupt,
                        path.string() + ":" + std::to_string(lineno) + ": expected 5 fields");
        Entry e;
        e.label = fields[0];
        e.style = fields[1];
        e.generator_id = fields[2];
        e.timestamp = std::strtoll(fields[3].c_str(), nullptr, 10);
        e.description = fields[4];
        cache.entries_.push_back(std::move(e));
    }
    return cache;
}

const std::string* DescriptionCache::find(std::string_view label, std::string_view style) const {
    for (const auto& e : entries_)
        if (e.label == label && e.style == style) return &e.description;
    return nullptr;
}

const std::string* DescriptionCache::find_exact(std::string_view label, std::string_view style,
                                                std::string_view generator_id) const {
    for (const auto& e : entries_)
        if (e.label == label && e.style == style && e.generator_id == generator_id)
            return &e.description;
    return nullptr;
}

void DescriptionCache::put(const std::string& label, const std::string& style,
                           const std::string& generator_id, const std::string& description) {
    if (const std::string* existing = find_exact(label, style, generator_id)) {
        if (*existing == description) return;
        throw Error(ErrorCode::DuplicateKey,
                    "(" + label + ", " + style + ", " + generator_id + ") already cached");
    }
    Entry e;
    e.label = label;
    e.style = style;
    e.generator_id = generator_id;
    e.timestamp = std::chrono::duration_cast<std::chrono::seconds>(
                      std::chrono::system_clock::now().time_since_epoch())
                      .count();
    e.description = description;
    entries_.push_back(e);

    if (!path_.empty()) {
        std::ofstream out(path_, std::ios::app);
        if (!out) throw Error(ErrorCode::InputMissing, "cannot append to " + path_.string());
        out << escape_field(e.label) << '\t' << escape_field(e.style) << '\t'
            << escape_field(e.generator_id) << '\t' << e.timestamp << '\t'
            << escape_field(e.description) << '\n';
    }
}

void CaptionSet::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::InputMissing, "cannot write " + path.string());
    for (const auto& [id, caption] : captions)
        out << escape_field(id) << '\t' << escape_field(caption) << '\n';
}

CaptionSet CaptionSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InputMissing, "cannot open " + path.string());
    CaptionSet set;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != 2)
            throw Error(ErrorCode::CacheCorrupt, path.string() + ": expected 2 fields");
        set.captions[fields[0]] = fields[1];
    }
    return set;
}

FixtureClient::FixtureClient(const std::filesystem::path& table_path) {
    std::ifstream in(table_path);
    if (!in)
        throw Error(ErrorCode::ClientUnavailable, "fixture table missing: " + table_path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line);
        if (fields.size() != 2)
            throw Error(ErrorCode::CacheCorrupt, table_path.string() + ": expected 2 fields");
        table_[fields[0]] = fields[1];
    }
    id_ = "fixture:" + table_path.stem().string();
}

std::string FixtureClient::generate(const std::string& request) {
    ++calls_;
    auto it = table_.find(request);
    if (it == table_.end())
        throw Error(ErrorCode::ClientUnavailable, "no fixture entry for request: " + request);
    return it->second;
}

HttpTextGenClient::HttpTextGenClient(std::string endpoint) : endpoint_(std::move(endpoint)) {}

std::string HttpTextGenClient::generate(const std::string& request) {
    // Split "http://host:port/path" into base and path.
    auto scheme_end = endpoint_.find("://");
    if (scheme_end == std::string::npos)
        throw Error(ErrorCode::ConfigInvalid, "endpoint must start with http://");
    auto path_start = endpoint_.find('/', scheme_end + 3);
    std::string base = path_start == std::string::npos ? endpoint_ : endpoint_.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : endpoint_.substr(path_start);

    httplib::Client client(base);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(30, 0);
    auto res = client.Post(path, request, "text/plain");
    if (!res)
        throw Error(ErrorCode::ClientUnavailable, "no response from " + endpoint_);
    if (res->status != 200)
        throw Error(ErrorCode::ClientUnavailable,
                    endpoint_ + " returned status " + std::to_string(res->status));
    return res->body;
}

std::unique_ptr<TextGenClient> client_from_env() {
    if (const char* fixture = std::getenv("VLD_FIXTURE"))
        return std::make_unique<FixtureClient>(fixture);
    if (const char* endpoint = std::getenv("VLD_LLM_ENDPOINT"))
        return std::make_unique<HttpTextGenClient>(endpoint);
    throw Error(ErrorCode::ClientUnavailable,
                "set VLD_FIXTURE (recorded table) or VLD_LLM_ENDPOINT");
}

std::string build_label_text(const std::string& label, PromptStyle style,
                             const DescriptionCache& cache, std::size_t token_limit) {
    std::string text;
    if (style == PromptStyle::plain) {
        text = "A photo of a " + label;
    } else {
        const std::string* desc = cache.find(label, style_name(style));
        if (!desc)
            throw Error(ErrorCode::MissingDescription,
                        "(" + label + ", " + std::string(style_name(style)) + ")");
        text = "a photo of " + label + ", " + *desc;
    }

    auto tokens = tokenize(text);
    if (tokens.size() <= token_limit) return text;
    // Drop description-tail tokens, never the base prompt.
    std::string out;
    for (std::size_t i = 0; i < token_limit; ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

std::size_t generate_descriptions(std::span<const std::string> labels, PromptStyle style,
                                  TextGenClient& client, DescriptionCache& cache) {
    if (style == PromptStyle::plain) return 0;  // plain needs no descriptions
    std::size_t calls = 0;
    for (const auto& label : labels) {
        if (cache.find_exact(label, style_name(style), client.id())) continue;
        std::string desc = client.generate(instruction_for(style, label));
        ++calls;
        if (desc.empty()) throw Error(ErrorCode::EmptyGeneration, "label '" + label + "'");
        cache.put(label, style_name(style), client.id(), desc);
    }
    return calls;
}

std::size_t generate_captions(std::span<const std::string> sample_ids,
                              TextGenClient& captioner, CaptionSet& captions) {
    std::size_t calls = 0;
    for (const auto& id : sample_ids) {
        if (captions.captions.contains(id)) continue;
        captions.captions[id] = captioner.generate(id);
        ++calls;
    }
    return calls;
}

}  // namespace vld
