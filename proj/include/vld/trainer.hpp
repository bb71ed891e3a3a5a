#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vld/dataset.hpp"
#include "vld/enrichment.hpp"
#include "vld/losses.hpp"
#include "vld/metrics.hpp"
#include "vld/student.hpp"
#include "vld/teacher.hpp"
#include "vld/text_encoder.hpp"

namespace vld {

struct TrainConfig {
    std::size_t epochs = 90;
    std::size_t batch_size = 128;
    std::string optimizer = "sgd";
    double learning_rate = 0.05;
    double momentum = 0.9;
    std::string schedule = "step";  // step decay x0.1 at 1/3 and 2/3 of epochs
    double onecycle_peak = 0.003;
    std::uint64_t seed = 0;
    LossConfig loss;
    std::vector<std::string> enabled = {"cls"};  // cls, mse, im_cst, vlprox, cap
    PromptStyle style = PromptStyle::plain;
    bool prompt_learning = false;
    std::size_t prompt_tokens = 8;
    std::size_t eval_every = 0;          // 0: no mid-run eval
    std::size_t report_last_epochs = 5;  // results average the last epochs

    void validate() const;
    std::map<std::string, double> resolved_weights() const;  // unit default
    double lr_at(std::size_t epoch) const;
};

struct EpochLog {
    std::size_t epoch = 0;
    double learning_rate = 0.0;
    std::map<std::string, double> losses;  // per-loss epoch means
    double total_loss = 0.0;
    std::optional<double> id_accuracy;
    std::optional<double> ood_accuracy;
};

struct TrainLog {
    std::vector<EpochLog> epochs;
    std::vector<std::size_t> batch_fewshot_counts;  // balanced-sampler audit
    double final_loss = 0.0;
    double last_epochs_mean_loss = 0.0;

    std::string to_text() const;
};

// Shared state a run threads through the loops: where label text features
// come from and the optional caption features.
struct RunContext {
    const DescriptionCache* descriptions = nullptr;
    const CaptionSet* captions = nullptr;
    LearnedPrompt* prompt = nullptr;  // updated in place when prompt learning is on
};

// Label text features for `labels` through the configured path: learned
// prompt through the teacher's token encoder when given, otherwise
// l(y) built from style + cache and resolved by the teacher.
FeatureMatrix resolve_label_texts(const TeacherProvider& teacher,
                                  std::span<const std::string> labels, PromptStyle style,
                                  const DescriptionCache* descriptions,
                                  const LearnedPrompt* prompt = nullptr);

// Gradient steps on the combined enabled losses over X_train.
TrainLog train(StudentModel& student, const TeacherProvider& teacher,
               const SplitDataset& dataset, const TrainConfig& config,
               const RunContext& context = {});

struct EvalOptions {
    double tau = 0.01;
    PromptStyle style = PromptStyle::plain;
    const DescriptionCache* descriptions = nullptr;
    const LearnedPrompt* prompt = nullptr;
    bool with_metrics = false;
    std::vector<std::size_t> neigh_ks = {3, 5, 10};
    std::vector<std::size_t> vlalign_ks = {2, 3, 5};
};

struct EvalResult {
    double accuracy = 0.0;
    std::size_t sample_count = 0;
    std::vector<MetricReport> reports;
};

// Top-1 accuracy under `classify` restricted to label_set; samples whose
// label is outside label_set are skipped.
EvalResult evaluate(const StudentModel& student, const TeacherProvider& teacher,
                    const SplitDataset& dataset, std::string_view split,
                    std::span<const std::string> label_set, const EvalOptions& options = {});

// Balanced finetuning: every batch holds ceil(B/2) base samples and at
// most floor(B/2) few-shot samples, the pool iterated without replacement
// and reshuffled per pass. Classification runs over Y_id united with the
// few-shot classes.
TrainLog fewshot_finetune(StudentModel& student, const TeacherProvider& teacher,
                          const SplitDataset& dataset, const FewshotDraw& draw,
                          const TrainConfig& config, const RunContext& context = {});

struct RetrievalConfig {
    double alpha = 1.0;
    double beta = 5.5;
};

// Training-free retrieval: alpha * exp(-beta (1 - q F_cache^T)) L_onehot
// + q T_text^T, softmaxed. Mutates nothing.
Matrix retrieval_fewshot(const StudentModel& student, const TeacherProvider& teacher,
                         const SplitDataset& dataset, const FewshotDraw& draw,
                         const FeatureMatrix& query, std::span<const std::string> labels_all,
                         const RetrievalConfig& config, PromptStyle style = PromptStyle::plain,
                         const DescriptionCache* descriptions = nullptr);

// Convenience: retrieval accuracy over the ood split.
double retrieval_accuracy(const StudentModel& student, const TeacherProvider& teacher,
                          const SplitDataset& dataset, const FewshotDraw& draw,
                          const RetrievalConfig& config, PromptStyle style = PromptStyle::plain,
                          const DescriptionCache* descriptions = nullptr);

struct SequentialOodResult {
    double split1_before = 0.0;
    double split1_after = 0.0;
    double split2_before = 0.0;
    double split2_after = 0.0;
};

// Zero-shot accuracy on ood split 2 before and after few-shot finetuning
// on ood split 1. Label subsets must be disjoint.
SequentialOodResult sequential_ood_protocol(StudentModel& student,
                                            const TeacherProvider& teacher,
                                            const SplitDataset& dataset,
                                            std::span<const std::string> ood_split_1,
                                            std::span<const std::string> ood_split_2,
                                            std::size_t shots, const TrainConfig& config,
                                            const RunContext& context = {});

}  // namespace vld
