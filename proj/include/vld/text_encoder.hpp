#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vld/matrix.hpp"

namespace vld {

// Token-embedding-level access to a frozen text encoder. Teacher adapters
// that only expose string-in/vector-out do not implement this.
class TokenEncoder {
public:
    virtual ~TokenEncoder() = default;

    virtual std::size_t token_dim() const = 0;
    virtual std::size_t feature_dim() const = 0;

    // Frozen embedding-table lookup for one token string.
    virtual std::vector<double> embed_token(std::string_view token) const = 0;

    // Maps an L x token_dim embedding sequence to a unit-norm feature.
    virtual std::vector<double> encode(const Matrix& token_embeddings) const = 0;

    // d(loss)/d(token_embeddings) given d(loss)/d(feature).
    virtual Matrix backward(const Matrix& token_embeddings,
                            std::span<const double> dfeature) const = 0;

    // Checksum over the frozen parameters; must not change across steps.
    virtual std::string params_checksum() const = 0;
};

// Deterministic seeded encoder: mean of tanh(A e_j + pos_j) pooled over
// positions, projected and normalized. Smooth in the inputs so context
// gradients can be checked against finite differences.
class SyntheticTextEncoder : public TokenEncoder {
public:
    SyntheticTextEncoder(std::uint64_t seed, std::size_t feature_dim,
                         std::size_t token_dim = 16, std::size_t hidden_dim = 24,
                         std::size_t max_positions = 80);

    std::size_t token_dim() const override { return token_dim_; }
    std::size_t feature_dim() const override { return feature_dim_; }
    std::vector<double> embed_token(std::string_view token) const override;
    std::vector<double> encode(const Matrix& token_embeddings) const override;
    Matrix backward(const Matrix& token_embeddings,
                    std::span<const double> dfeature) const override;
    std::string params_checksum() const override;

private:
    std::uint64_t seed_;
    std::size_t token_dim_, hidden_dim_, feature_dim_, max_positions_;
    Matrix proj_in_;    // hidden x token_dim
    Matrix positions_;  // max_positions x hidden
    Matrix proj_out_;   // feature x hidden
};

// Trainable context token embeddings prepended to label tokens (CoOp
// style). Gradients flow only into the context, never the encoder.
struct LearnedPrompt {
    Matrix context;  // M x token_dim

    static LearnedPrompt seeded(std::size_t num_tokens, std::size_t token_dim,
                                std::uint64_t seed);
    static LearnedPrompt zeros(std::size_t num_tokens, std::size_t token_dim);
};

// Feature for [context; label tokens] through the frozen encoder.
std::vector<double> encode_learned_prompt(const LearnedPrompt& prompt,
                                          std::string_view label_text,
                                          const TokenEncoder& encoder);

// d(loss)/d(context) given d(loss)/d(feature).
Matrix learned_prompt_gradient(const LearnedPrompt& prompt, std::string_view label_text,
                               const TokenEncoder& encoder, std::span<const double> dfeature);

// A common positive and negative context pair for multi-label prediction.
struct DualPrompt {
    LearnedPrompt positive;
    LearnedPrompt negative;
};

// Materializes positive/negative text features for each label.
std::pair<FeatureMatrix, FeatureMatrix> encode_dual_prompt(
    const DualPrompt& prompts, std::span<const std::string> labels,
    const TokenEncoder& encoder);

}  // namespace vld
