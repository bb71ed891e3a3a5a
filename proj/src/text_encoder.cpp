#include "vld/text_encoder.hpp"

#include <cmath>
#include <cstdio>

#include "vld/cache_io.hpp"
#include "vld/rng.hpp"
#include "vld/tokens.hpp"

namespace vld {

namespace {

Matrix seeded_gauss(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale) {
    Matrix m(rows, cols);
    Rng rng(seed);
    for (double& v : m.data) v = scale * rng.next_gaussian();
    return m;
}

}  // namespace

SyntheticTextEncoder::SyntheticTextEncoder(std::uint64_t seed, std::size_t feature_dim,
                                           std::size_t token_dim, std::size_t hidden_dim,
                                           std::size_t max_positions)
    : seed_(seed),
      token_dim_(token_dim),
      hidden_dim_(hidden_dim),
      feature_dim_(feature_dim),
      max_positions_(max_positions),
      proj_in_(seeded_gauss(hidden_dim, token_dim, seed ^ 0xa11ce5ULL,
                            1.0 / std::sqrt(static_cast<double>(token_dim)))),
      positions_(seeded_gauss(max_positions, hidden_dim, seed ^ 0xb0b5eedULL, 0.3)),
      proj_out_(seeded_gauss(feature_dim, hidden_dim, seed ^ 0xc0ffeeULL,
                             1.0 / std::sqrt(static_cast<double>(hidden_dim)))) {}

std::vector<double> SyntheticTextEncoder::embed_token(std::string_view token) const {
    Rng rng(seed_ ^ 0x70cdedULL ^ hash64(token));
    std::vector<double> e(token_dim_);
    for (double& v : e) v = rng.next_gaussian();
    return e;
}

std::vector<double> SyntheticTextEncoder::encode(const Matrix& token_embeddings) const {
    if (token_embeddings.cols != token_dim_)
        throw Error(ErrorCode::DimMismatch, "token embedding dim mismatch");
    const std::size_t len = token_embeddings.rows;
    if (len == 0) throw Error(ErrorCode::TooFewRows, "empty token sequence");

    std::vector<double> pooled(hidden_dim_, 0.0);
    for (std::size_t j = 0; j < len; ++j) {
        auto e = token_embeddings.row(j);
        std::size_t pos = std::min(j, max_positions_ - 1);
        for (std::size_t h = 0; h < hidden_dim_; ++h) {
            double u = positions_.at(pos, h);
            for (std::size_t t = 0; t < token_dim_; ++t) u += proj_in_.at(h, t) * e[t];
            pooled[h] += std::tanh(u);
        }
    }
    for (double& v : pooled) v /= static_cast<double>(len);

    std::vector<double> feature(feature_dim_, 0.0);
    for (std::size_t d = 0; d < feature_dim_; ++d)
        for (std::size_t h = 0; h < hidden_dim_; ++h)
            feature[d] += proj_out_.at(d, h) * pooled[h];
    normalize_row_inplace(feature);
    return feature;
}

Matrix SyntheticTextEncoder::backward(const Matrix& token_embeddings,
                                      std::span<const double> dfeature) const {
    if (dfeature.size() != feature_dim_)
        throw Error(ErrorCode::DimMismatch, "dfeature dim mismatch");
    const std::size_t len = token_embeddings.rows;

    // Recompute the forward pass pieces.
    std::vector<double> pooled(hidden_dim_, 0.0);
    Matrix pre(len, hidden_dim_);  // pre-activation per position
    for (std::size_t j = 0; j < len; ++j) {
        auto e = token_embeddings.row(j);
        std::size_t pos = std::min(j, max_positions_ - 1);
        for (std::size_t h = 0; h < hidden_dim_; ++h) {
            double u = positions_.at(pos, h);
            for (std::size_t t = 0; t < token_dim_; ++t) u += proj_in_.at(h, t) * e[t];
            pre.at(j, h) = u;
            pooled[h] += std::tanh(u);
        }
    }
    for (double& v : pooled) v /= static_cast<double>(len);

    std::vector<double> raw(feature_dim_, 0.0);
    for (std::size_t d = 0; d < feature_dim_; ++d)
        for (std::size_t h = 0; h < hidden_dim_; ++h)
            raw[d] += proj_out_.at(d, h) * pooled[h];
    double norm = l2_norm(raw);
    if (norm < 1e-12) throw Error(ErrorCode::ZeroRow, "zero encoder output");

    // Through normalization: draw = (df - f_hat (f_hat . df)) / norm.
    std::vector<double> fhat(feature_dim_);
    for (std::size_t d = 0; d < feature_dim_; ++d) fhat[d] = raw[d] / norm;
    double proj = 0.0;
    for (std::size_t d = 0; d < feature_dim_; ++d) proj += fhat[d] * dfeature[d];
    std::vector<double> draw(feature_dim_);
    for (std::size_t d = 0; d < feature_dim_; ++d)
        draw[d] = (dfeature[d] - fhat[d] * proj) / norm;

    std::vector<double> dpooled(hidden_dim_, 0.0);
    for (std::size_t h = 0; h < hidden_dim_; ++h)
        for (std::size_t d = 0; d < feature_dim_; ++d)
            dpooled[h] += proj_out_.at(d, h) * draw[d];

    Matrix dembed(len, token_dim_);
    for (std::size_t j = 0; j < len; ++j) {
        for (std::size_t h = 0; h < hidden_dim_; ++h) {
            double th = std::tanh(pre.at(j, h));
            double du = dpooled[h] * (1.0 - th * th) / static_cast<double>(len);
            auto de = dembed.row(j);
            for (std::size_t t = 0; t < token_dim_; ++t) de[t] += proj_in_.at(h, t) * du;
        }
    }
    return dembed;
}

std::string SyntheticTextEncoder::params_checksum() const {
    std::uint32_t c = crc32(proj_in_.data.data(), proj_in_.data.size() * sizeof(double));
    c ^= crc32(positions_.data.data(), positions_.data.size() * sizeof(double));
    c ^= crc32(proj_out_.data.data(), proj_out_.data.size() * sizeof(double));
    char hex[16];
    std::snprintf(hex, sizeof(hex), "%08x", c);
    return hex;
}

LearnedPrompt LearnedPrompt::seeded(std::size_t num_tokens, std::size_t token_dim,
                                    std::uint64_t seed) {
    if (num_tokens < 1) throw Error(ErrorCode::BadSpec, "prompt needs at least one token");
    LearnedPrompt p;
    p.context = seeded_gauss(num_tokens, token_dim, seed ^ 0x9e3779b9ULL, 0.02);
    return p;
}

LearnedPrompt LearnedPrompt::zeros(std::size_t num_tokens, std::size_t token_dim) {
    if (num_tokens < 1) throw Error(ErrorCode::BadSpec, "prompt needs at least one token");
    LearnedPrompt p;
    p.context = Matrix(num_tokens, token_dim);
    return p;
}

namespace {

Matrix prompt_sequence(const LearnedPrompt& prompt, std::string_view label_text,
                       const TokenEncoder& encoder) {
    auto tokens = tokenize(label_text);
    Matrix seq(prompt.context.rows + tokens.size(), encoder.token_dim());
    for (std::size_t j = 0; j < prompt.context.rows; ++j) {
        auto src = prompt.context.row(j);
        auto dst = seq.row(j);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    for (std::size_t j = 0; j < tokens.size(); ++j) {
        auto e = encoder.embed_token(tokens[j]);
        auto dst = seq.row(prompt.context.rows + j);
        std::copy(e.begin(), e.end(), dst.begin());
    }
    return seq;
}

}  // namespace

std::vector<double> encode_learned_prompt(const LearnedPrompt& prompt,
                                          std::string_view label_text,
                                          const TokenEncoder& encoder) {
    return encoder.encode(prompt_sequence(prompt, label_text, encoder));
}

Matrix learned_prompt_gradient(const LearnedPrompt& prompt, std::string_view label_text,
                               const TokenEncoder& encoder,
                               std::span<const double> dfeature) {
    Matrix seq = prompt_sequence(prompt, label_text, encoder);
    Matrix dseq = encoder.backward(seq, dfeature);
    Matrix dcontext(prompt.context.rows, prompt.context.cols);
    for (std::size_t j = 0; j < dcontext.rows; ++j) {
        auto src = dseq.row(j);
        auto dst = dcontext.row(j);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return dcontext;
}

std::pair<FeatureMatrix, FeatureMatrix> encode_dual_prompt(
    const DualPrompt& prompts, std::span<const std::string> labels,
    const TokenEncoder& encoder) {
    FeatureMatrix pos(labels.size(), encoder.feature_dim(), FeatureKind::text);
    FeatureMatrix neg(labels.size(), encoder.feature_dim(), FeatureKind::text);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto p = encode_learned_prompt(prompts.positive, labels[i], encoder);
        auto q = encode_learned_prompt(prompts.negative, labels[i], encoder);
        std::copy(p.begin(), p.end(), pos.row(i).begin());
        std::copy(q.begin(), q.end(), neg.row(i).begin());
        pos.ids[i] = labels[i];
        neg.ids[i] = labels[i];
    }
    return {std::move(pos), std::move(neg)};
}

}  // namespace vld
