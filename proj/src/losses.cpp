#include "vld/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vld {

namespace {

void check_batch(const FeatureMatrix& a, const FeatureMatrix& b) {
    if (a.dim() != b.dim())
        throw Error(ErrorCode::DimMismatch,
                    std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    if (a.rows() != b.rows())
        throw Error(ErrorCode::DimMismatch,
                    "batch rows " + std::to_string(a.rows()) + " vs " + std::to_string(b.rows()));
}

void check_labels(const std::vector<std::size_t>& labels, std::size_t n, std::size_t num_classes) {
    if (labels.size() != n)
        throw Error(ErrorCode::LabelOutOfRange,
                    "label count " + std::to_string(labels.size()) + " != rows " + std::to_string(n));
    for (std::size_t v : labels)
        if (v >= num_classes)
            throw Error(ErrorCode::LabelOutOfRange, "label index " + std::to_string(v));
}

void check_tau(double tau) {
    if (!(tau > 0.0))
        throw Error(ErrorCode::NonPositiveTemperature, "tau = " + std::to_string(tau));
}

double log_sum_exp(std::span<const double> z) {
    double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

}  // namespace

void LossConfig::validate() const {
    check_tau(tau_cls);
    check_tau(tau_imcst);
    check_tau(tau_cap);
    if (k_vlprox < 1) throw Error(ErrorCode::KOutOfRange, "k_vlprox must be >= 1");
    for (const auto& [name, w] : weights)
        if (w < 0.0) throw Error(ErrorCode::ConfigInvalid, "negative weight for " + name);
}

LossResult loss_cls(const FeatureMatrix& student, const FeatureMatrix& text,
                    const std::vector<std::size_t>& labels, double tau) {
    check_tau(tau);
    if (student.dim() != text.dim())
        throw Error(ErrorCode::DimMismatch,
                    std::to_string(student.dim()) + " vs " + std::to_string(text.dim()));
    const std::size_t n = student.rows();
    const std::size_t c = text.rows();
    check_labels(labels, n, c);

    LossResult res;
    res.grad = Matrix(n, student.dim());
    res.per_sample.assign(n, 0.0);

    std::vector<double> z(c);
    for (std::size_t i = 0; i < n; ++i) {
        auto s = student.row(i);
        for (std::size_t y = 0; y < c; ++y) z[y] = cosine(s, text.row(y)) / tau;
        double lse = log_sum_exp(z);
        res.per_sample[i] = lse - z[labels[i]];

        auto g = res.grad.row(i);
        for (std::size_t y = 0; y < c; ++y) {
            double p = std::exp(z[y] - lse);
            double coef = (p - (y == labels[i] ? 1.0 : 0.0)) / (tau * static_cast<double>(n));
            auto t = text.row(y);
            for (std::size_t d = 0; d < g.size(); ++d) g[d] += coef * (t[d] - s[d]);
        }
    }
    res.value = std::accumulate(res.per_sample.begin(), res.per_sample.end(), 0.0) /
                static_cast<double>(n);
    return res;
}

LossResult loss_mse(const FeatureMatrix& student, const FeatureMatrix& teacher) {
    check_batch(student, teacher);
    if (student.ids != teacher.ids)
        throw Error(ErrorCode::IdMismatch, "student/teacher ids differ");

    const std::size_t n = student.rows();
    LossResult res;
    res.grad = Matrix(n, student.dim());
    res.per_sample.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto s = student.row(i);
        auto t = teacher.row(i);
        res.per_sample[i] = squared_l2(s, t);
        auto g = res.grad.row(i);
        for (std::size_t d = 0; d < g.size(); ++d)
            g[d] = 2.0 * (s[d] - t[d]) / static_cast<double>(n);
    }
    res.value = std::accumulate(res.per_sample.begin(), res.per_sample.end(), 0.0) /
                static_cast<double>(n);
    return res;
}

LossResult loss_im_cst(const FeatureMatrix& student, const FeatureMatrix& teacher, double tau,
                       const std::vector<std::uint8_t>* keep) {
    check_tau(tau);
    check_batch(student, teacher);
    const std::size_t n = student.rows();
    if (keep && keep->size() != n)
        throw Error(ErrorCode::DimMismatch, "filter mask size != batch rows");

    LossResult res;
    res.grad = Matrix(n, student.dim());
    res.per_sample.assign(n, 0.0);

    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (keep && !(*keep)[i]) continue;
        auto s = student.row(i);
        for (std::size_t j = 0; j < n; ++j) z[j] = -squared_l2(s, teacher.row(j)) / tau;
        double lse = log_sum_exp(z);
        res.per_sample[i] = lse - z[i];

        auto g = res.grad.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            double p = std::exp(z[j] - lse);
            double coef = 2.0 * (p - (j == i ? 1.0 : 0.0)) / (tau * static_cast<double>(n));
            auto t = teacher.row(j);
            for (std::size_t d = 0; d < g.size(); ++d) g[d] += coef * (t[d] - s[d]);
        }
    }
    res.value = std::accumulate(res.per_sample.begin(), res.per_sample.end(), 0.0) /
                static_cast<double>(n);
    return res;
}

std::vector<std::uint8_t> teacher_correct_mask(const FeatureMatrix& teacher_img,
                                               const FeatureMatrix& text,
                                               const std::vector<std::size_t>& labels,
                                               double tau) {
    Matrix probs = classify(teacher_img, text, tau);
    check_labels(labels, teacher_img.rows(), text.rows());
    std::vector<std::uint8_t> mask(teacher_img.rows(), 0);
    for (std::size_t i = 0; i < teacher_img.rows(); ++i)
        mask[i] = argmax_row(probs.row(i)) == labels[i] ? 1 : 0;
    return mask;
}

LossResult loss_vlprox(const FeatureMatrix& student, const FeatureMatrix& teacher_img,
                       const FeatureMatrix& text, const std::vector<std::size_t>& labels,
                       double tau, std::size_t k, bool filter) {
    check_tau(tau);
    if (k < 1) throw Error(ErrorCode::KOutOfRange, "k must be >= 1");
    check_batch(student, teacher_img);
    if (student.dim() != text.dim())
        throw Error(ErrorCode::DimMismatch,
                    std::to_string(student.dim()) + " vs " + std::to_string(text.dim()));

    const std::size_t n = student.rows();
    const std::size_t c = text.rows();
    check_labels(labels, n, c);
    const std::size_t keff = std::min(k, c);

    LossResult res;
    res.grad = Matrix(n, student.dim());
    res.per_sample.assign(n, 0.0);

    std::vector<double> zt(c), zs(c);
    std::vector<std::size_t> order(c);
    std::vector<double> topk_t(keff), topk_s(keff);

    for (std::size_t i = 0; i < n; ++i) {
        auto t_img = teacher_img.row(i);
        for (std::size_t y = 0; y < c; ++y) zt[y] = cosine(t_img, text.row(y)) / tau;

        // Top-k teacher labels; stable sort keeps the lowest index on ties,
        // which also makes argmax = order[0].
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return zt[a] > zt[b]; });
        if (filter && order[0] != labels[i]) continue;

        auto s = student.row(i);
        for (std::size_t w = 0; w < keff; ++w) {
            std::size_t y = order[w];
            topk_t[w] = zt[y];
            topk_s[w] = cosine(s, text.row(y)) / tau;
        }
        double lse_t = log_sum_exp(topk_t);
        double lse_s = log_sum_exp(topk_s);

        double kl = 0.0;
        auto g = res.grad.row(i);
        for (std::size_t w = 0; w < keff; ++w) {
            double log_q = topk_t[w] - lse_t;
            double log_p = topk_s[w] - lse_s;
            double q = std::exp(log_q);
            double p = std::exp(log_p);
            kl += q * (log_q - log_p);
            double coef = (p - q) / (tau * static_cast<double>(n));
            auto t = text.row(order[w]);
            for (std::size_t d = 0; d < g.size(); ++d) g[d] += coef * (t[d] - s[d]);
        }
        res.per_sample[i] = kl;
    }
    res.value = std::accumulate(res.per_sample.begin(), res.per_sample.end(), 0.0) /
                static_cast<double>(n);
    return res;
}

LossResult loss_cap(const FeatureMatrix& student, const FeatureMatrix& caption_text,
                    const std::vector<std::size_t>& labels, double tau) {
    check_tau(tau);
    check_batch(student, caption_text);
    const std::size_t n = student.rows();
    if (labels.size() != n)
        throw Error(ErrorCode::LabelOutOfRange, "label count != rows");

    LossResult res;
    res.grad = Matrix(n, student.dim());
    res.per_sample.assign(n, 0.0);

    std::vector<std::size_t> pool;
    std::vector<double> z;
    for (std::size_t i = 0; i < n; ++i) {
        // Own caption plus captions of other classes; same-class non-self
        // captions are excluded from the negatives.
        pool.clear();
        pool.push_back(i);
        for (std::size_t j = 0; j < n; ++j)
            if (labels[j] != labels[i]) pool.push_back(j);

        auto s = student.row(i);
        z.resize(pool.size());
        for (std::size_t a = 0; a < pool.size(); ++a)
            z[a] = cosine(s, caption_text.row(pool[a])) / tau;
        double lse = log_sum_exp(z);
        res.per_sample[i] = lse - z[0];

        auto g = res.grad.row(i);
        for (std::size_t a = 0; a < pool.size(); ++a) {
            double p = std::exp(z[a] - lse);
            double coef = (p - (a == 0 ? 1.0 : 0.0)) / (tau * static_cast<double>(n));
            auto cap = caption_text.row(pool[a]);
            for (std::size_t d = 0; d < g.size(); ++d) g[d] += coef * (cap[d] - s[d]);
        }
    }
    res.value = std::accumulate(res.per_sample.begin(), res.per_sample.end(), 0.0) /
                static_cast<double>(n);
    return res;
}

LossResult combine(const std::vector<std::pair<std::string, LossResult>>& losses,
                   const std::map<std::string, double>& weights) {
    LossResult total;
    bool first = true;
    for (const auto& [name, part] : losses) {
        auto it = weights.find(name);
        if (it == weights.end())
            throw Error(ErrorCode::MissingWeight, "no weight for loss '" + name + "'");
        double w = it->second;
        if (first) {
            total.grad = Matrix(part.grad.rows, part.grad.cols);
            total.per_sample.assign(part.per_sample.size(), 0.0);
            first = false;
        } else if (part.grad.rows != total.grad.rows || part.grad.cols != total.grad.cols) {
            throw Error(ErrorCode::ShapeMismatch, "loss gradients have different shapes");
        }
        if (w == 0.0) continue;
        total.value += w * part.value;
        for (std::size_t i = 0; i < total.grad.data.size(); ++i)
            total.grad.data[i] += w * part.grad.data[i];
        for (std::size_t i = 0; i < total.per_sample.size(); ++i)
            total.per_sample[i] += w * part.per_sample[i];
    }
    return total;
}

}  // namespace vld
