#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vld {

// Whitespace tokenizer shared by label-text truncation and the synthetic
// text encoder. Punctuation stays attached to its word.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) tokens.emplace_back(text.substr(start, i - start));
    }
    return tokens;
}

inline std::size_t token_count(std::string_view text) { return tokenize(text).size(); }

}  // namespace vld
