#include "vld/metrics.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace vld {

namespace {

void check_matched(const FeatureMatrix& a, const FeatureMatrix& b) {
    if (a.rows() != b.rows() || a.dim() != b.dim())
        throw Error(ErrorCode::DimMismatch, "matrices have different shapes");
    if (a.ids != b.ids) throw Error(ErrorCode::IdMismatch, "sample ids differ");
}

// Indices 0..n-1 ordered by ascending key, lowest index on ties.
std::vector<std::size_t> sorted_indices(const std::vector<double>& key) {
    std::vector<std::size_t> order(key.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
    return order;
}

}  // namespace

std::string MetricReport::to_text() const {
    std::ostringstream os;
    os << "metric " << name << "\n";
    os << "split " << dataset_tag << "\n";
    if (k) os << "k " << *k << "\n";
    os << "n " << sample_count << "\n";
    os << "values";
    os.precision(17);
    for (double v : values) os << " " << v;
    os << "\n";
    return os.str();
}

double metric_rel(const FeatureMatrix& student, const FeatureMatrix& teacher) {
    check_matched(student, teacher);
    const std::size_t n = student.rows();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto s = student.row(i);
        std::size_t best = 0;
        double best_d = squared_l2(teacher.row(0), s);
        for (std::size_t j = 1; j < n; ++j) {
            double d = squared_l2(teacher.row(j), s);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        if (best == i) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

double metric_neigh(const FeatureMatrix& student, const FeatureMatrix& teacher, std::size_t k) {
    check_matched(student, teacher);
    const std::size_t n = student.rows();
    if (k < 1 || k > n - 1)
        throw Error(ErrorCode::KOutOfRange,
                    "k = " + std::to_string(k) + " with N = " + std::to_string(n));

    auto knn_set = [&](const FeatureMatrix& m, std::size_t i, std::vector<std::uint8_t>& mark) {
        std::vector<double> dist(n);
        for (std::size_t j = 0; j < n; ++j) dist[j] = squared_l2(m.row(j), m.row(i));
        auto order = sorted_indices(dist);
        std::size_t taken = 0;
        for (std::size_t j : order) {
            if (j == i) continue;  // self excluded by id
            mark[j] += 1;
            if (++taken == k) break;
        }
    };

    double overlap_sum = 0.0;
    std::vector<std::uint8_t> mark(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(mark.begin(), mark.end(), 0);
        knn_set(student, i, mark);
        knn_set(teacher, i, mark);
        std::size_t both = 0;
        for (std::uint8_t m : mark)
            if (m == 2) ++both;
        overlap_sum += static_cast<double>(both) / static_cast<double>(k);
    }
    return overlap_sum / static_cast<double>(n);
}

double metric_vlalign(const FeatureMatrix& student, const FeatureMatrix& teacher_img,
                      const FeatureMatrix& text, std::size_t k) {
    if (student.rows() != teacher_img.rows())
        throw Error(ErrorCode::DimMismatch, "student/teacher image counts differ");
    if (student.dim() != teacher_img.dim() || student.dim() != text.dim())
        throw Error(ErrorCode::DimMismatch, "feature dims differ");
    const std::size_t c = text.rows();
    if (k < 1 || k > c)
        throw Error(ErrorCode::KOutOfRange,
                    "k = " + std::to_string(k) + " with |Y| = " + std::to_string(c));

    const std::size_t n = student.rows();
    double total = 0.0;
    std::vector<double> tdist(c);
    std::vector<double> arr_s(k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t y = 0; y < c; ++y)
            tdist[y] = std::sqrt(squared_l2(teacher_img.row(i), text.row(y)));
        auto order = sorted_indices(tdist);
        for (std::size_t w = 0; w < k; ++w)
            arr_s[w] = std::sqrt(squared_l2(student.row(i), text.row(order[w])));

        std::size_t inversions = 0;
        for (std::size_t p = 0; p + 1 < k; ++p)
            for (std::size_t q = p + 1; q < k; ++q)
                if (arr_s[p] > arr_s[q]) ++inversions;
        total += static_cast<double>(inversions);
    }
    return total / static_cast<double>(n);
}

std::pair<double, double> mse_angle_stats(const FeatureMatrix& student,
                                          const FeatureMatrix& teacher) {
    check_matched(student, teacher);
    const std::size_t n = student.rows();
    double mse = 0.0;
    double degrees = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d2 = squared_l2(student.row(i), teacher.row(i));
        mse += d2;
        double cs = std::clamp(1.0 - 0.5 * d2, -1.0, 1.0);
        degrees += std::acos(cs) * 180.0 / 3.14159265358979323846;
    }
    return {mse / static_cast<double>(n), degrees / static_cast<double>(n)};
}

std::vector<double> text_spectrum(const FeatureMatrix& text, std::size_t top_n) {
    const std::size_t n = text.rows();
    const std::size_t d = text.dim();
    if (n < 2) throw Error(ErrorCode::TooFewRows, "need at least 2 rows");

    Eigen::MatrixXd m(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = text.values.at(i, j);
    m.rowwise() -= m.colwise().mean();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    std::size_t count = std::min<std::size_t>(top_n, static_cast<std::size_t>(sv.size()));
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = sv(static_cast<Eigen::Index>(i));
    return out;
}

double pairwise_cosine_mean(const FeatureMatrix& text) {
    const std::size_t n = text.rows();
    if (n < 2) throw Error(ErrorCode::TooFewRows, "need at least 2 rows");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) sum += cosine(text.row(i), text.row(j));
    return sum / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

MultilabelScores multilabel_metrics(const BoolMatrix& predictions, const BoolMatrix& truth) {
    if (predictions.rows != truth.rows || predictions.cols != truth.cols)
        throw Error(ErrorCode::ShapeMismatch, "prediction/truth shapes differ");
    const std::size_t n = predictions.rows;
    const std::size_t l = predictions.cols;
    if (n == 0 || l == 0) throw Error(ErrorCode::ShapeMismatch, "empty matrices");

    MultilabelScores out;
    std::size_t correct_total = 0;
    out.per_label_precision.assign(l, 0.0);
    out.per_label_recall.assign(l, 0.0);

    for (std::size_t y = 0; y < l; ++y) {
        double num = 0.0;       // present and predicted correctly
        double prec_den = 0.0;  // min(present + predicted, 1)
        double rec_den = 0.0;   // present
        for (std::size_t i = 0; i < n; ++i) {
            bool present = truth.at(i, y) != 0;
            bool pred = predictions.at(i, y) != 0;
            bool correct = present == pred;
            if (correct) ++correct_total;
            if (present && correct) num += 1.0;
            if (present || pred) prec_den += 1.0;
            if (present) rec_den += 1.0;
        }
        out.per_label_precision[y] = prec_den > 0.0 ? num / prec_den : 0.0;
        out.per_label_recall[y] = rec_den > 0.0 ? num / rec_den : 0.0;
    }

    out.m1_accuracy = static_cast<double>(correct_total) / static_cast<double>(n * l);
    out.precision = std::accumulate(out.per_label_precision.begin(),
                                    out.per_label_precision.end(), 0.0) /
                    static_cast<double>(l);
    out.recall =
        std::accumulate(out.per_label_recall.begin(), out.per_label_recall.end(), 0.0) /
        static_cast<double>(l);
    out.f1 = (out.precision > 0.0 && out.recall > 0.0)
                 ? 2.0 / (1.0 / out.precision + 1.0 / out.recall)
                 : 0.0;
    return out;
}

BoolMatrix multilabel_predict(const FeatureMatrix& student, const FeatureMatrix& pos_text,
                              const FeatureMatrix& neg_text, double tau, double bias) {
    if (!(tau > 0.0))
        throw Error(ErrorCode::NonPositiveTemperature, "tau = " + std::to_string(tau));
    if (pos_text.rows() != neg_text.rows())
        throw Error(ErrorCode::DimMismatch, "positive/negative prompt counts differ");
    if (student.dim() != pos_text.dim() || student.dim() != neg_text.dim())
        throw Error(ErrorCode::DimMismatch, "feature dims differ");

    const std::size_t n = student.rows();
    const std::size_t l = pos_text.rows();
    BoolMatrix out(n, l);
    for (std::size_t i = 0; i < n; ++i) {
        auto s = student.row(i);
        for (std::size_t y = 0; y < l; ++y) {
            double zp = cosine(s, pos_text.row(y)) / tau;
            double zn = cosine(s, neg_text.row(y)) / tau;
            // Two-way softmax, computed as a stable logistic.
            double p_pos = 1.0 / (1.0 + std::exp(zn - zp));
            out.at(i, y) = p_pos > 0.5 + bias ? 1 : 0;
        }
    }
    return out;
}

}  // namespace vld
