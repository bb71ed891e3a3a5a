#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vld/matrix.hpp"
#include "vld/teacher.hpp"

namespace vld {

// Disjoint in-distribution and out-of-distribution label sets.
struct LabelSpace {
    std::vector<std::string> id_labels;
    std::vector<std::string> ood_labels;

    bool is_id(std::string_view label) const;
    bool is_ood(std::string_view label) const;
    void validate() const;  // OverlappingSplits on intersection
};

struct Sample {
    std::string id;
    std::string label;
    std::vector<double> input;    // raw student input (cached-feature flow)
    std::string image_ref;        // path or cache offset for manifest datasets
    std::string caption_id;       // empty when uncaptioned
};

struct SplitDataset {
    std::vector<Sample> train;
    std::vector<Sample> id_eval;
    std::vector<Sample> ood_eval;
    LabelSpace labels;
    std::size_t input_dim = 0;

    const std::vector<Sample>& split(std::string_view name) const;  // UnknownSplit
    void validate() const;  // label membership and globally unique ids
};

// Seeded disjoint partition of labels; default ratio 0.5.
std::pair<std::vector<std::string>, std::vector<std::string>> split_labels(
    std::span<const std::string> labels, std::uint64_t seed, double ratio = 0.5);

// Fixed split file: lines "id\t<label>" / "ood\t<label>" covering every
// label exactly once.
std::pair<std::vector<std::string>, std::vector<std::string>> split_labels_from_file(
    std::span<const std::string> labels, const std::filesystem::path& path);

// Seeded uniform draw without replacement, clamped per class.
struct FewshotDraw {
    std::size_t shots = 0;
    std::uint64_t seed = 0;
    std::map<std::string, std::vector<std::string>> per_class;  // label -> sample ids

    std::vector<std::string> all_ids() const;
};

FewshotDraw draw_fewshot(const SplitDataset& dataset, std::size_t shots, std::uint64_t seed);

struct SyntheticDatasetConfig {
    SyntheticTeacherSpec teacher;
    std::size_t samples_per_class = 20;
    double ood_fraction = 0.5;
    double id_eval_fraction = 0.25;  // of an ID class's samples
    std::size_t input_dim = 32;
    double input_warp = 1.0;  // tanh steepness of the raw-input scramble

    void validate() const;
};

struct SyntheticDataset {
    SplitDataset data;
    std::shared_ptr<TeacherProvider> teacher;
};

// Desk-scale dataset: raw inputs are a fixed seeded nonlinear scramble of
// the teacher image features, so a small student can in principle recover
// the teacher's visual space. OOD class centers never appear in train.
SyntheticDataset synthetic_dataset(const SyntheticDatasetConfig& config);

// Manifest file: one sample per line, tab-separated
//   id <TAB> path-or-cache-ref <TAB> label [<TAB> caption-id]
SplitDataset read_manifest(const std::filesystem::path& path, const LabelSpace& labels);

// Fills Sample::input from a feature cache row with the same id.
void attach_inputs_from_cache(SplitDataset& dataset, const FeatureMatrix& cache);

struct DatasetStats {
    std::size_t train = 0, id_eval = 0, ood_eval = 0;
    std::size_t id_labels = 0, ood_labels = 0;
};

// Published split sizes for the supported recognition datasets; used as
// validation fixtures for externally produced manifests.
std::optional<DatasetStats> known_dataset_stats(std::string_view name);

void validate_against_stats(const SplitDataset& dataset, const DatasetStats& stats);

}  // namespace vld
