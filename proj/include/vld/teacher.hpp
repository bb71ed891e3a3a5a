#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vld/matrix.hpp"
#include "vld/text_encoder.hpp"

namespace vld {

// Frozen source of teacher image and text features. Deterministic for
// fixed inputs; exposes no trainable parameters.
class TeacherProvider {
public:
    virtual ~TeacherProvider() = default;

    virtual std::size_t embed_dim() const = 0;
    virtual FeatureMatrix image_features(std::span<const std::string> sample_ids) const = 0;
    virtual FeatureMatrix text_features(std::span<const std::string> texts) const = 0;
    virtual std::string generator_id() const = 0;

    // Token-embedding-level text access, when the adapter has it.
    virtual const TokenEncoder* token_encoder() const { return nullptr; }
};

// Throws EncoderLacksTokenAccess for string-in/vector-out adapters.
const TokenEncoder& require_token_encoder(const TeacherProvider& teacher);

struct SyntheticTeacherSpec {
    std::uint64_t seed = 0;
    std::size_t num_classes = 8;
    std::size_t embed_dim = 16;
    double center_dispersion = 1.0;  // spread of class centers around a common anchor
    double noise_scale = 0.1;        // within-class image noise
    double text_offset_scale = 0.25; // enriched-text perturbation away from the center

    void validate() const;  // BadSpec
    std::vector<std::string> label_names() const;
    static std::string sample_id(std::string_view label, std::size_t index);
};

// Class centers drawn from a seeded isotropic distribution and normalized.
// An image feature is its class center plus seeded noise; the plain label
// prompt maps exactly to the center, any other text to a seeded
// perturbation of it. Same spec, bit-identical features.
std::unique_ptr<TeacherProvider> synthetic_teacher(const SyntheticTeacherSpec& spec);

// Serves features exported to `dir`/images.vlmd and `dir`/texts.vlmd.
// Texts are looked up by exact string.
std::unique_ptr<TeacherProvider> cached_teacher(const std::filesystem::path& dir);

// Exports a provider's features over the given domain in cached_teacher's
// layout.
void export_teacher_cache(const TeacherProvider& teacher,
                          std::span<const std::string> sample_ids,
                          std::span<const std::string> texts,
                          const std::filesystem::path& dir);

}  // namespace vld
