#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vld/matrix.hpp"

namespace vld {

// Serialized output of a metric evaluation.
struct MetricReport {
    std::string name;
    std::string dataset_tag;  // train / id / ood
    std::optional<std::size_t> k;
    std::vector<double> values;
    std::size_t sample_count = 0;

    std::string to_text() const;
};

// Fraction of samples whose student feature is nearest to their own
// teacher feature. Requires matched ids.
double metric_rel(const FeatureMatrix& student, const FeatureMatrix& teacher);

// Mean overlap of the k-nearest-neighbor sets in student and teacher
// visual spaces, self excluded. 1 <= k <= N-1.
double metric_neigh(const FeatureMatrix& student, const FeatureMatrix& teacher, std::size_t k);

// Mean inversion count between the teacher's ordering of its k nearest
// text features per image and the student's distances to the same texts.
double metric_vlalign(const FeatureMatrix& student, const FeatureMatrix& teacher_img,
                      const FeatureMatrix& text, std::size_t k);

// (mean squared error, mean angle in degrees) between matched rows.
std::pair<double, double> mse_angle_stats(const FeatureMatrix& student,
                                          const FeatureMatrix& teacher);

// Singular values of the mean-centered matrix, descending, first top_n.
std::vector<double> text_spectrum(const FeatureMatrix& text, std::size_t top_n);

// Mean cosine over all unordered row pairs.
double pairwise_cosine_mean(const FeatureMatrix& text);

struct BoolMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> data;

    BoolMatrix() = default;
    BoolMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0) {}
    std::uint8_t& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    std::uint8_t at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct MultilabelScores {
    double m1_accuracy = 0.0;
    double precision = 0.0;  // averaged over labels
    double recall = 0.0;     // averaged over labels
    double f1 = 0.0;
    std::vector<double> per_label_precision;
    std::vector<double> per_label_recall;
};

// M1 overall accuracy plus the per-label precision/recall and F1 of the
// multi-label evaluation; a label with a zero denominator contributes 0.
MultilabelScores multilabel_metrics(const BoolMatrix& predictions, const BoolMatrix& truth);

// Two-way softmax over (positive, negative) prompt similarities per label;
// positive iff P_pos > 0.5 + bias (strict).
BoolMatrix multilabel_predict(const FeatureMatrix& student, const FeatureMatrix& pos_text,
                              const FeatureMatrix& neg_text, double tau, double bias);

}  // namespace vld
