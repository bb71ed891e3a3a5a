#include "vld/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace vld {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ZeroRow: return "ZeroRow";
        case ErrorCode::DimMismatch: return "DimMismatch";
        case ErrorCode::NonPositiveTemperature: return "NonPositiveTemperature";
        case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
        case ErrorCode::IdMismatch: return "IdMismatch";
        case ErrorCode::MissingWeight: return "MissingWeight";
        case ErrorCode::KOutOfRange: return "KOutOfRange";
        case ErrorCode::TooFewRows: return "TooFewRows";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::MissingDescription: return "MissingDescription";
        case ErrorCode::DuplicateKey: return "DuplicateKey";
        case ErrorCode::ClientUnavailable: return "ClientUnavailable";
        case ErrorCode::EmptyGeneration: return "EmptyGeneration";
        case ErrorCode::EncoderLacksTokenAccess: return "EncoderLacksTokenAccess";
        case ErrorCode::BadSpec: return "BadSpec";
        case ErrorCode::CacheCorrupt: return "CacheCorrupt";
        case ErrorCode::VersionUnsupported: return "VersionUnsupported";
        case ErrorCode::MissingSample: return "MissingSample";
        case ErrorCode::MissingText: return "MissingText";
        case ErrorCode::TooFewLabels: return "TooFewLabels";
        case ErrorCode::EmptyClass: return "EmptyClass";
        case ErrorCode::MissingCaptions: return "MissingCaptions";
        case ErrorCode::DivergedLoss: return "DivergedLoss";
        case ErrorCode::EmptyFewshotPool: return "EmptyFewshotPool";
        case ErrorCode::EmptyCache: return "EmptyCache";
        case ErrorCode::OverlappingSplits: return "OverlappingSplits";
        case ErrorCode::UnknownSplit: return "UnknownSplit";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::InputMissing: return "InputMissing";
    }
    return "UnknownError";
}

const char* feature_kind_name(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::student_visual: return "student_visual";
        case FeatureKind::teacher_visual: return "teacher_visual";
        case FeatureKind::text: return "text";
    }
    return "unknown";
}

FeatureKind feature_kind_from_u8(std::uint8_t v) {
    if (v > 2) throw Error(ErrorCode::CacheCorrupt, "unknown feature kind byte " + std::to_string(v));
    return static_cast<FeatureKind>(v);
}

FeatureMatrix::FeatureMatrix(std::size_t n, std::size_t d, FeatureKind k)
    : values(n, d), kind(k), ids(n) {
    for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
}

void FeatureMatrix::validate_ids() const {
    if (ids.size() != rows())
        throw Error(ErrorCode::IdMismatch,
                    "id count " + std::to_string(ids.size()) + " != rows " + std::to_string(rows()));
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second)
            throw Error(ErrorCode::IdMismatch, "duplicate id '" + id + "'");
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::DimMismatch,
                    std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double squared_l2(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::DimMismatch,
                    std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    return 1.0 - 0.5 * squared_l2(a, b);
}

void normalize_row_inplace(std::span<double> row) {
    double n = l2_norm(row);
    if (n < 1e-12) throw Error(ErrorCode::ZeroRow, "row norm below 1e-12");
    for (double& x : row) x /= n;
}

FeatureMatrix normalize(const FeatureMatrix& m) {
    FeatureMatrix out = m;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        double n = l2_norm(out.row(i));
        if (n < 1e-12)
            throw Error(ErrorCode::ZeroRow, "row " + std::to_string(i) + " has norm below 1e-12");
        auto r = out.row(i);
        for (double& x : r) x /= n;
    }
    return out;
}

Matrix classify(const FeatureMatrix& student, const FeatureMatrix& text, double tau) {
    if (student.dim() != text.dim())
        throw Error(ErrorCode::DimMismatch,
                    "student dim " + std::to_string(student.dim()) +
                        " != text dim " + std::to_string(text.dim()));
    if (!(tau > 0.0))
        throw Error(ErrorCode::NonPositiveTemperature, "tau = " + std::to_string(tau));

    const std::size_t n = student.rows();
    const std::size_t c = text.rows();
    Matrix probs(n, c);
    std::vector<double> logits(c);
    for (std::size_t i = 0; i < n; ++i) {
        auto s = student.row(i);
        double maxz = -1e300;
        for (std::size_t y = 0; y < c; ++y) {
            logits[y] = cosine(s, text.row(y)) / tau;
            maxz = std::max(maxz, logits[y]);
        }
        double denom = 0.0;
        for (std::size_t y = 0; y < c; ++y) {
            logits[y] = std::exp(logits[y] - maxz);
            denom += logits[y];
        }
        auto out = probs.row(i);
        for (std::size_t y = 0; y < c; ++y) out[y] = logits[y] / denom;
    }
    return probs;
}

std::size_t argmax_row(std::span<const double> row) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
        if (row[j] > row[best]) best = j;
    return best;
}

}  // namespace vld
