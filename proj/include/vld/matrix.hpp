#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vld/errors.hpp"

namespace vld {

// Plain dense row-major matrix holding probabilities, gradients, raw
// inputs and the like. FeatureMatrix wraps it for embedding rows.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

enum class FeatureKind : std::uint8_t {
    student_visual = 0,
    teacher_visual = 1,
    text = 2,
};

const char* feature_kind_name(FeatureKind kind);
FeatureKind feature_kind_from_u8(std::uint8_t v);

// N x D embedding rows with provenance and per-row identifiers.
struct FeatureMatrix {
    Matrix values;
    FeatureKind kind = FeatureKind::student_visual;
    std::vector<std::string> ids;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t n, std::size_t d, FeatureKind k);

    std::size_t rows() const { return values.rows; }
    std::size_t dim() const { return values.cols; }
    std::span<double> row(std::size_t i) { return values.row(i); }
    std::span<const double> row(std::size_t i) const { return values.row(i); }

    // Throws on duplicate ids or an id count that does not match rows.
    void validate_ids() const;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

// ||a - b||^2. Throws DimMismatch.
double squared_l2(std::span<const double> a, std::span<const double> b);

// Canonical cosine path for unit-norm vectors: cos = 1 - ||a-b||^2 / 2.
// Every loss and metric goes through this identity.
double cosine(std::span<const double> a, std::span<const double> b);

// Returns a copy with every row scaled to unit L2 norm. Idempotent.
// Throws ZeroRow(index) when a row norm is below 1e-12.
FeatureMatrix normalize(const FeatureMatrix& m);

// In-place variant used by providers that build rows incrementally.
void normalize_row_inplace(std::span<double> row);

// Row-wise softmax over cos(student_i, text_y) / tau; N x C, rows sum to 1.
Matrix classify(const FeatureMatrix& student, const FeatureMatrix& text, double tau);

// Lowest index wins on ties.
std::size_t argmax_row(std::span<const double> row);

}  // namespace vld
