#include "vld/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "vld/cache_io.hpp"
#include "vld/rng.hpp"

namespace vld {

const TokenEncoder& require_token_encoder(const TeacherProvider& teacher) {
    const TokenEncoder* enc = teacher.token_encoder();
    if (!enc)
        throw Error(ErrorCode::EncoderLacksTokenAccess,
                    "teacher '" + teacher.generator_id() + "' only exposes string-in/vector-out");
    return *enc;
}

void SyntheticTeacherSpec::validate() const {
    if (num_classes < 2) throw Error(ErrorCode::BadSpec, "need at least 2 classes");
    if (embed_dim < 2) throw Error(ErrorCode::BadSpec, "need embed_dim >= 2");
    if (!(center_dispersion > 0.0)) throw Error(ErrorCode::BadSpec, "dispersion must be > 0");
    if (noise_scale < 0.0) throw Error(ErrorCode::BadSpec, "noise must be >= 0");
    if (text_offset_scale < 0.0) throw Error(ErrorCode::BadSpec, "text offset must be >= 0");
}

std::vector<std::string> SyntheticTeacherSpec::label_names() const {
    std::vector<std::string> names(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "class_%04zu", c);
        names[c] = buf;
    }
    return names;
}

std::string SyntheticTeacherSpec::sample_id(std::string_view label, std::size_t index) {
    return std::string(label) + "#" + std::to_string(index);
}

namespace {

class SyntheticTeacher : public TeacherProvider {
public:
    explicit SyntheticTeacher(const SyntheticTeacherSpec& spec)
        : spec_(spec),
          labels_(spec.label_names()),
          centers_(spec.num_classes, spec.embed_dim),
          encoder_(spec.seed ^ 0x7e9c4e2fULL, spec.embed_dim) {
        spec_.validate();
        Rng rng(spec_.seed ^ 0xce17e75ULL);
        std::vector<double> anchor(spec_.embed_dim);
        for (double& v : anchor) v = rng.next_gaussian();
        normalize_row_inplace(anchor);
        for (std::size_t c = 0; c < spec_.num_classes; ++c) {
            auto row = centers_.row(c);
            for (std::size_t d = 0; d < spec_.embed_dim; ++d)
                row[d] = anchor[d] + spec_.center_dispersion * rng.next_gaussian();
            normalize_row_inplace(row);
        }
        for (std::size_t c = 0; c < spec_.num_classes; ++c) {
            class_index_[labels_[c]] = c;
            for (std::size_t o = c + 1; o < spec_.num_classes; ++o)
                if (squared_l2(centers_.row(c), centers_.row(o)) < 1e-20)
                    throw Error(ErrorCode::BadSpec, "duplicate class centers");
        }
    }

    std::size_t embed_dim() const override { return spec_.embed_dim; }

    FeatureMatrix image_features(std::span<const std::string> sample_ids) const override {
        FeatureMatrix out(sample_ids.size(), spec_.embed_dim, FeatureKind::teacher_visual);
        for (std::size_t i = 0; i < sample_ids.size(); ++i) {
            const std::string& id = sample_ids[i];
            auto hash_pos = id.rfind('#');
            std::string label = hash_pos == std::string::npos ? id : id.substr(0, hash_pos);
            auto it = class_index_.find(label);
            if (it == class_index_.end())
                throw Error(ErrorCode::MissingSample, "unknown sample id '" + id + "'");
            auto center = centers_.row(it->second);
            auto row = out.row(i);
            std::copy(center.begin(), center.end(), row.begin());
            if (spec_.noise_scale > 0.0) {
                Rng rng(spec_.seed ^ 0x1517beefULL ^ hash64(id));
                for (double& v : row) v += spec_.noise_scale * rng.next_gaussian();
                normalize_row_inplace(row);
            }
            out.ids[i] = id;
        }
        return out;
    }

    FeatureMatrix text_features(std::span<const std::string> texts) const override {
        FeatureMatrix out(texts.size(), spec_.embed_dim, FeatureKind::text);
        for (std::size_t i = 0; i < texts.size(); ++i) {
            const std::string& text = texts[i];
            auto row = out.row(i);
            std::size_t cls = spec_.num_classes;  // sentinel: no class mentioned
            for (std::size_t c = 0; c < spec_.num_classes; ++c) {
                if (text.find(labels_[c]) != std::string::npos) {
                    cls = c;
                    break;
                }
            }
            if (cls < spec_.num_classes && text == "A photo of a " + labels_[cls]) {
                auto center = centers_.row(cls);
                std::copy(center.begin(), center.end(), row.begin());
            } else {
                Rng rng(spec_.seed ^ 0x7e777e77ULL ^ hash64(text));
                if (cls < spec_.num_classes) {
                    auto center = centers_.row(cls);
                    for (std::size_t d = 0; d < row.size(); ++d)
                        row[d] = center[d] + spec_.text_offset_scale * rng.next_gaussian();
                } else {
                    for (double& v : row) v = rng.next_gaussian();
                }
                normalize_row_inplace(row);
            }
            out.ids[i] = text;
        }
        return out;
    }

    std::string generator_id() const override {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "synthetic:seed=%llu:c=%zu:d=%zu:noise=%g",
                      static_cast<unsigned long long>(spec_.seed), spec_.num_classes,
                      spec_.embed_dim, spec_.noise_scale);
        return buf;
    }

    const TokenEncoder* token_encoder() const override { return &encoder_; }

private:
    SyntheticTeacherSpec spec_;
    std::vector<std::string> labels_;
    Matrix centers_;
    std::unordered_map<std::string, std::size_t> class_index_;
    SyntheticTextEncoder encoder_;
};

class CachedTeacher : public TeacherProvider {
public:
    explicit CachedTeacher(const std::filesystem::path& dir) {
        auto [img, img_meta] = cache_read(dir / "images.vlmd");
        auto [txt, txt_meta] = cache_read(dir / "texts.vlmd");
        if (img.dim() != txt.dim())
            throw Error(ErrorCode::CacheCorrupt, "image/text dims differ in " + dir.string());
        if (txt_meta.texts.size() != txt.rows())
            throw Error(ErrorCode::CacheCorrupt, "text cache lacks text keys: " + dir.string());
        images_ = std::move(img);
        texts_ = std::move(txt);
        generator_ = img_meta.generator_id;
        for (std::size_t i = 0; i < images_.rows(); ++i) image_index_[images_.ids[i]] = i;
        for (std::size_t i = 0; i < texts_.rows(); ++i) text_index_[txt_meta.texts[i]] = i;
    }

    std::size_t embed_dim() const override { return images_.dim(); }

    FeatureMatrix image_features(std::span<const std::string> sample_ids) const override {
        FeatureMatrix out(sample_ids.size(), images_.dim(), FeatureKind::teacher_visual);
        for (std::size_t i = 0; i < sample_ids.size(); ++i) {
            auto it = image_index_.find(sample_ids[i]);
            if (it == image_index_.end())
                throw Error(ErrorCode::MissingSample, "'" + sample_ids[i] + "' not in cache");
            auto src = images_.row(it->second);
            std::copy(src.begin(), src.end(), out.row(i).begin());
            out.ids[i] = sample_ids[i];
        }
        return out;
    }

    FeatureMatrix text_features(std::span<const std::string> texts) const override {
        FeatureMatrix out(texts.size(), texts_.dim(), FeatureKind::text);
        for (std::size_t i = 0; i < texts.size(); ++i) {
            auto it = text_index_.find(texts[i]);
            if (it == text_index_.end())
                throw Error(ErrorCode::MissingText, "'" + texts[i] + "' not in cache");
            auto src = texts_.row(it->second);
            std::copy(src.begin(), src.end(), out.row(i).begin());
            out.ids[i] = texts[i];
        }
        return out;
    }

    std::string generator_id() const override { return generator_; }

private:
    FeatureMatrix images_;
    FeatureMatrix texts_;
    std::string generator_;
    std::unordered_map<std::string, std::size_t> image_index_;
    std::unordered_map<std::string, std::size_t> text_index_;
};

}  // namespace

std::unique_ptr<TeacherProvider> synthetic_teacher(const SyntheticTeacherSpec& spec) {
    return std::make_unique<SyntheticTeacher>(spec);
}

std::unique_ptr<TeacherProvider> cached_teacher(const std::filesystem::path& dir) {
    return std::make_unique<CachedTeacher>(dir);
}

void export_teacher_cache(const TeacherProvider& teacher,
                          std::span<const std::string> sample_ids,
                          std::span<const std::string> texts,
                          const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> id_vec(sample_ids.begin(), sample_ids.end());
    std::vector<std::string> text_vec(texts.begin(), texts.end());

    FeatureMatrix img = teacher.image_features(id_vec);
    CacheMeta img_meta;
    img_meta.generator_id = teacher.generator_id();
    cache_write(img, img_meta, dir / "images.vlmd");

    FeatureMatrix txt = teacher.text_features(text_vec);
    CacheMeta txt_meta;
    txt_meta.generator_id = teacher.generator_id();
    txt_meta.texts = text_vec;
    cache_write(txt, txt_meta, dir / "texts.vlmd");
}

}  // namespace vld
