#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vld/matrix.hpp"

namespace vld {

// Temperatures, top-k and weights for the loss family. The default tau
// matches the converged logit scale of CLIP-family teachers.
struct LossConfig {
    double tau_cls = 0.01;
    double tau_imcst = 0.01;
    double tau_cap = 0.01;
    std::size_t k_vlprox = 256;
    bool vlprox_filter = true;   // filter misaligned images (on by default)
    bool imcst_filter = false;   // imitate the entire teacher visual space by default
    std::map<std::string, double> weights;

    void validate() const;
};

// Scalar value (mean over samples), gradient w.r.t. the student feature
// rows, and the per-sample terms the mean was taken over.
struct LossResult {
    double value = 0.0;
    Matrix grad;                     // N x D
    std::vector<double> per_sample;  // N
};

// -log P_S(y|x) with P_S the softmax over cos(S(x), T_txt(l(y)))/tau.
LossResult loss_cls(const FeatureMatrix& student, const FeatureMatrix& text,
                    const std::vector<std::size_t>& labels, double tau);

// ||S(x) - T_img(x)||^2 per sample; requires matched ids.
LossResult loss_mse(const FeatureMatrix& student, const FeatureMatrix& teacher);

// Soft visual-space imitation: softmax over negated squared distances to
// the batch's teacher features. `keep`, when given, gates per-sample terms
// (the filtering ablation); filtered samples contribute zero.
LossResult loss_im_cst(const FeatureMatrix& student, const FeatureMatrix& teacher, double tau,
                       const std::vector<std::uint8_t>* keep = nullptr);

// Filtered KL between teacher and student label distributions, both
// renormalized over the teacher's top-k labels. k is clamped to |Y|.
LossResult loss_vlprox(const FeatureMatrix& student, const FeatureMatrix& teacher_img,
                       const FeatureMatrix& text, const std::vector<std::size_t>& labels,
                       double tau, std::size_t k, bool filter = true);

// Caption contrast: pull the sample toward its own caption feature,
// negatives restricted to captions of other classes.
LossResult loss_cap(const FeatureMatrix& student, const FeatureMatrix& caption_text,
                    const std::vector<std::size_t>& labels, double tau);

// Weighted sum of values, gradients and per-sample terms.
LossResult combine(const std::vector<std::pair<std::string, LossResult>>& losses,
                   const std::map<std::string, double>& weights);

// Teacher-correctness indicator per sample: argmax_y P_T(y|x) == label(x).
std::vector<std::uint8_t> teacher_correct_mask(const FeatureMatrix& teacher_img,
                                               const FeatureMatrix& text,
                                               const std::vector<std::size_t>& labels,
                                               double tau);

}  // namespace vld
