#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vld/matrix.hpp"

namespace vld {

struct StudentConfig {
    std::string backbone = "mlp";  // "mlp" or "linear"
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 64;
    std::size_t out_dim = 0;  // teacher embedding width
    std::uint64_t seed = 0;

    void validate() const;
};

// Pluggable backbone plus a linear projection to the teacher dimension,
// followed by row normalization. Forward is deterministic for fixed
// parameters and input.
class StudentModel {
public:
    explicit StudentModel(const StudentConfig& config);

    const StudentConfig& config() const { return config_; }
    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    // Unit-norm N x out_dim student features.
    FeatureMatrix forward(const Matrix& inputs, std::span<const std::string> ids) const;

    // Parameter gradient for d(loss)/d(features); same layout as params().
    std::vector<double> backward(const Matrix& inputs, const Matrix& dfeatures) const;

    std::string params_checksum() const;

    void save(const std::filesystem::path& path) const;
    static StudentModel load(const std::filesystem::path& path);

private:
    StudentConfig config_;
    std::vector<double> params_;
    bool is_mlp_ = true;

    // Parameter block offsets into params_.
    std::size_t w1_ = 0, b1_ = 0, w2_ = 0, b2_ = 0;

    void layout_and_init();
};

}  // namespace vld
