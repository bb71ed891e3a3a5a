#include "vld/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "vld/cache_io.hpp"
#include "vld/rng.hpp"

namespace vld {

bool LabelSpace::is_id(std::string_view label) const {
    return std::find(id_labels.begin(), id_labels.end(), label) != id_labels.end();
}

bool LabelSpace::is_ood(std::string_view label) const {
    return std::find(ood_labels.begin(), ood_labels.end(), label) != ood_labels.end();
}

void LabelSpace::validate() const {
    std::unordered_set<std::string> seen(id_labels.begin(), id_labels.end());
    if (seen.size() != id_labels.size())
        throw Error(ErrorCode::OverlappingSplits, "duplicate id labels");
    for (const auto& l : ood_labels)
        if (!seen.insert(l).second)
            throw Error(ErrorCode::OverlappingSplits, "label '" + l + "' in both splits");
}

const std::vector<Sample>& SplitDataset::split(std::string_view name) const {
    if (name == "train") return train;
    if (name == "id") return id_eval;
    if (name == "ood") return ood_eval;
    throw Error(ErrorCode::UnknownSplit, std::string(name));
}

void SplitDataset::validate() const {
    labels.validate();
    std::unordered_set<std::string> ids;
    auto check = [&](const std::vector<Sample>& samples, bool want_id) {
        for (const auto& s : samples) {
            if (!ids.insert(s.id).second)
                throw Error(ErrorCode::IdMismatch, "duplicate sample id '" + s.id + "'");
            bool ok = want_id ? labels.is_id(s.label) : labels.is_ood(s.label);
            if (!ok)
                throw Error(ErrorCode::OverlappingSplits,
                            "sample '" + s.id + "' label '" + s.label + "' in wrong label set");
        }
    };
    check(train, true);
    check(id_eval, true);
    check(ood_eval, false);
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_labels(
    std::span<const std::string> labels, std::uint64_t seed, double ratio) {
    if (labels.size() < 2) throw Error(ErrorCode::TooFewLabels, "need at least 2 labels");
    if (!(ratio > 0.0) || !(ratio < 1.0))
        throw Error(ErrorCode::ConfigInvalid, "ratio must be in (0, 1)");

    std::vector<std::string> shuffled(labels.begin(), labels.end());
    Rng rng(seed ^ 0x5b1177e5ULL);
    rng.shuffle(shuffled);

    // ratio = fraction kept in-distribution, rounded to the nearest count
    // but leaving both sides nonempty.
    std::size_t n_id = static_cast<std::size_t>(std::lround(ratio * static_cast<double>(labels.size())));
    n_id = std::clamp<std::size_t>(n_id, 1, labels.size() - 1);

    std::vector<std::string> id_labels(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_id));
    std::vector<std::string> ood_labels(shuffled.begin() + static_cast<std::ptrdiff_t>(n_id), shuffled.end());
    std::sort(id_labels.begin(), id_labels.end());
    std::sort(ood_labels.begin(), ood_labels.end());
    return {std::move(id_labels), std::move(ood_labels)};
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_labels_from_file(
    std::span<const std::string> labels, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InputMissing, "cannot open " + path.string());

    std::unordered_map<std::string, char> assignment;  // label -> 'i' or 'o'
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw Error(ErrorCode::ConfigInvalid,
                        path.string() + ":" + std::to_string(lineno) + ": expected 'id|ood<TAB>label'");
        std::string kind = line.substr(0, tab);
        std::string label = unescape_field(line.substr(tab + 1));
        if (kind != "id" && kind != "ood")
            throw Error(ErrorCode::ConfigInvalid, "split kind must be 'id' or 'ood'");
        if (!assignment.emplace(label, kind[0]).second)
            throw Error(ErrorCode::OverlappingSplits, "label '" + label + "' listed twice");
    }

    std::vector<std::string> id_labels, ood_labels;
    for (const auto& label : labels) {
        auto it = assignment.find(label);
        if (it == assignment.end())
            throw Error(ErrorCode::ConfigInvalid, "label '" + label + "' missing from split file");
        (it->second == 'i' ? id_labels : ood_labels).push_back(label);
    }
    if (assignment.size() != labels.size())
        throw Error(ErrorCode::ConfigInvalid, "split file lists labels outside the dataset");
    if (id_labels.empty() || ood_labels.empty())
        throw Error(ErrorCode::TooFewLabels, "both splits must be nonempty");
    return {std::move(id_labels), std::move(ood_labels)};
}

std::vector<std::string> FewshotDraw::all_ids() const {
    std::vector<std::string> ids;
    for (const auto& [label, selected] : per_class)
        ids.insert(ids.end(), selected.begin(), selected.end());
    return ids;
}

FewshotDraw draw_fewshot(const SplitDataset& dataset, std::size_t shots, std::uint64_t seed) {
    if (shots < 1) throw Error(ErrorCode::ConfigInvalid, "shots must be >= 1");

    std::map<std::string, std::vector<std::string>> by_class;
    for (const auto& label : dataset.labels.ood_labels) by_class[label];
    for (const auto& s : dataset.ood_eval) by_class[s.label].push_back(s.id);

    FewshotDraw draw;
    draw.shots = shots;
    draw.seed = seed;
    for (auto& [label, ids] : by_class) {
        if (ids.empty()) throw Error(ErrorCode::EmptyClass, "class '" + label + "'");
        Rng rng(seed ^ 0xfe45607ULL ^ hash64(label));
        rng.shuffle(ids);
        ids.resize(std::min(shots, ids.size()));
        std::sort(ids.begin(), ids.end());
        draw.per_class[label] = std::move(ids);
    }
    return draw;
}

void SyntheticDatasetConfig::validate() const {
    teacher.validate();
    if (samples_per_class < 1) throw Error(ErrorCode::BadSpec, "need samples_per_class >= 1");
    if (!(ood_fraction > 0.0) || !(ood_fraction < 1.0))
        throw Error(ErrorCode::BadSpec, "ood_fraction must be in (0, 1)");
    if (id_eval_fraction < 0.0 || id_eval_fraction >= 1.0)
        throw Error(ErrorCode::BadSpec, "id_eval_fraction must be in [0, 1)");
    if (input_dim < 2) throw Error(ErrorCode::BadSpec, "input_dim must be >= 2");
}

SyntheticDataset synthetic_dataset(const SyntheticDatasetConfig& config) {
    config.validate();
    const auto& spec = config.teacher;

    SyntheticDataset out;
    out.teacher = synthetic_teacher(spec);

    auto names = spec.label_names();
    auto [id_labels, ood_labels] = split_labels(names, spec.seed ^ 0x0dd50117ULL,
                                                1.0 - config.ood_fraction);
    out.data.labels.id_labels = id_labels;
    out.data.labels.ood_labels = ood_labels;
    out.data.input_dim = config.input_dim;

    // Fixed scramble taking teacher features to raw student inputs.
    Matrix warp(config.input_dim, spec.embed_dim);
    {
        Rng rng(spec.seed ^ 0x5c2a3b1eULL);
        double scale = 1.5 / std::sqrt(static_cast<double>(spec.embed_dim));
        for (double& v : warp.data) v = scale * rng.next_gaussian();
    }

    std::vector<std::string> all_ids;
    std::vector<const std::string*> id_label_of;
    for (const auto& label : names)
        for (std::size_t i = 0; i < config.samples_per_class; ++i) {
            all_ids.push_back(SyntheticTeacherSpec::sample_id(label, i));
            id_label_of.push_back(&label);
        }
    FeatureMatrix teacher_feats = out.teacher->image_features(all_ids);

    const std::size_t id_eval_per_class = static_cast<std::size_t>(
        std::floor(config.id_eval_fraction * static_cast<double>(config.samples_per_class)));

    for (std::size_t s = 0; s < all_ids.size(); ++s) {
        Sample sample;
        sample.id = all_ids[s];
        sample.label = *id_label_of[s];
        sample.input.assign(config.input_dim, 0.0);
        auto t = teacher_feats.row(s);
        for (std::size_t i = 0; i < config.input_dim; ++i) {
            double u = 0.0;
            for (std::size_t d = 0; d < spec.embed_dim; ++d) u += warp.at(i, d) * t[d];
            sample.input[i] = std::tanh(config.input_warp * u);
        }

        std::size_t within = s % config.samples_per_class;
        if (out.data.labels.is_ood(sample.label)) {
            out.data.ood_eval.push_back(std::move(sample));
        } else if (within < id_eval_per_class) {
            out.data.id_eval.push_back(std::move(sample));
        } else {
            out.data.train.push_back(std::move(sample));
        }
    }
    out.data.validate();
    return out;
}

SplitDataset read_manifest(const std::filesystem::path& path, const LabelSpace& labels) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InputMissing, "cannot open " + path.string());
    labels.validate();

    SplitDataset dataset;
    dataset.labels = labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i)
            if (i == line.size() || line[i] == '\t') {
                fields.push_back(unescape_field(line.substr(start, i - start)));
                start = i + 1;
            }
        if (fields.size() < 4 || fields.size() > 5)
            throw Error(ErrorCode::ConfigInvalid,
                        path.string() + ":" + std::to_string(lineno) +
                            ": expected 'split<TAB>id<TAB>ref<TAB>label[<TAB>caption]'");
        Sample s;
        s.id = fields[1];
        s.image_ref = fields[2];
        s.label = fields[3];
        if (fields.size() == 5) s.caption_id = fields[4];
        if (fields[0] == "train")
            dataset.train.push_back(std::move(s));
        else if (fields[0] == "id")
            dataset.id_eval.push_back(std::move(s));
        else if (fields[0] == "ood")
            dataset.ood_eval.push_back(std::move(s));
        else
            throw Error(ErrorCode::UnknownSplit, fields[0]);
    }
    dataset.validate();
    return dataset;
}

void attach_inputs_from_cache(SplitDataset& dataset, const FeatureMatrix& cache) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < cache.rows(); ++i) index[cache.ids[i]] = i;
    auto fill = [&](std::vector<Sample>& samples) {
        for (auto& s : samples) {
            auto it = index.find(s.id);
            if (it == index.end())
                throw Error(ErrorCode::MissingSample, "'" + s.id + "' not in input cache");
            auto row = cache.row(it->second);
            s.input.assign(row.begin(), row.end());
        }
    };
    fill(dataset.train);
    fill(dataset.id_eval);
    fill(dataset.ood_eval);
    dataset.input_dim = cache.dim();
}

std::optional<DatasetStats> known_dataset_stats(std::string_view name) {
    struct Row {
        std::string_view name;
        DatasetStats stats;
    };
    static const Row rows[] = {
        {"caltechbirds", {4122, 1740, 5926, 100, 100}},
        {"stanfordcars", {2874, 1164, 4106, 98, 98}},
        {"flower102", {3112, 1303, 3774, 51, 51}},
        {"food101", {35700, 15300, 50000, 51, 50}},
        {"sun397", {38663, 16444, 53647, 200, 197}},
        {"tiered-imagenet", {314108, 134587, 124261, 351, 97}},
    };
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (const auto& row : rows)
        if (row.name == lower) return row.stats;
    return std::nullopt;
}

void validate_against_stats(const SplitDataset& dataset, const DatasetStats& stats) {
    auto mismatch = [](const char* what, std::size_t got, std::size_t want) {
        throw Error(ErrorCode::ConfigInvalid,
                    std::string(what) + ": got " + std::to_string(got) + ", expected " +
                        std::to_string(want));
    };
    if (dataset.train.size() != stats.train) mismatch("train size", dataset.train.size(), stats.train);
    if (dataset.id_eval.size() != stats.id_eval)
        mismatch("id_eval size", dataset.id_eval.size(), stats.id_eval);
    if (dataset.ood_eval.size() != stats.ood_eval)
        mismatch("ood_eval size", dataset.ood_eval.size(), stats.ood_eval);
    if (dataset.labels.id_labels.size() != stats.id_labels)
        mismatch("id label count", dataset.labels.id_labels.size(), stats.id_labels);
    if (dataset.labels.ood_labels.size() != stats.ood_labels)
        mismatch("ood label count", dataset.labels.ood_labels.size(), stats.ood_labels);
}

}  // namespace vld
