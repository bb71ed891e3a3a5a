#include "vld/student.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "vld/cache_io.hpp"
#include "vld/rng.hpp"

namespace vld {

void StudentConfig::validate() const {
    if (backbone != "mlp" && backbone != "linear")
        throw Error(ErrorCode::ConfigInvalid, "unknown backbone '" + backbone + "'");
    if (input_dim < 1 || out_dim < 1)
        throw Error(ErrorCode::ConfigInvalid, "input_dim and out_dim must be >= 1");
    if (backbone == "mlp" && hidden_dim < 1)
        throw Error(ErrorCode::ConfigInvalid, "hidden_dim must be >= 1");
}

StudentModel::StudentModel(const StudentConfig& config) : config_(config) {
    config_.validate();
    is_mlp_ = config_.backbone == "mlp";
    layout_and_init();
}

void StudentModel::layout_and_init() {
    const std::size_t in = config_.input_dim;
    const std::size_t hid = is_mlp_ ? config_.hidden_dim : 0;
    const std::size_t out = config_.out_dim;

    if (is_mlp_) {
        w1_ = 0;
        b1_ = w1_ + hid * in;
        w2_ = b1_ + hid;
        b2_ = w2_ + out * hid;
        params_.assign(b2_ + out, 0.0);
    } else {
        w2_ = 0;
        b2_ = w2_ + out * in;
        params_.assign(b2_ + out, 0.0);
    }

    Rng rng(config_.seed ^ 0x57d347ULL);
    if (is_mlp_) {
        double s1 = 1.0 / std::sqrt(static_cast<double>(in));
        for (std::size_t i = 0; i < hid * in; ++i) params_[w1_ + i] = s1 * rng.next_gaussian();
        double s2 = 1.0 / std::sqrt(static_cast<double>(hid));
        for (std::size_t i = 0; i < out * hid; ++i) params_[w2_ + i] = s2 * rng.next_gaussian();
    } else {
        double s = 1.0 / std::sqrt(static_cast<double>(in));
        for (std::size_t i = 0; i < out * in; ++i) params_[w2_ + i] = s * rng.next_gaussian();
    }
}

FeatureMatrix StudentModel::forward(const Matrix& inputs,
                                    std::span<const std::string> ids) const {
    if (inputs.cols != config_.input_dim)
        throw Error(ErrorCode::DimMismatch, "input dim " + std::to_string(inputs.cols) +
                                                " != " + std::to_string(config_.input_dim));
    if (ids.size() != inputs.rows)
        throw Error(ErrorCode::IdMismatch, "id count != input rows");

    const std::size_t n = inputs.rows;
    const std::size_t in = config_.input_dim;
    const std::size_t hid = config_.hidden_dim;
    const std::size_t out = config_.out_dim;

    FeatureMatrix features(n, out, FeatureKind::student_visual);
    std::vector<double> h(hid);
    for (std::size_t i = 0; i < n; ++i) {
        auto x = inputs.row(i);
        const double* proj_src = x.data();
        std::size_t proj_in = in;
        std::size_t proj_w = w2_;
        if (is_mlp_) {
            for (std::size_t j = 0; j < hid; ++j) {
                double u = params_[b1_ + j];
                const double* w = &params_[w1_ + j * in];
                for (std::size_t t = 0; t < in; ++t) u += w[t] * x[t];
                h[j] = std::tanh(u);
            }
            proj_src = h.data();
            proj_in = hid;
        }
        auto row = features.row(i);
        for (std::size_t d = 0; d < out; ++d) {
            double z = params_[b2_ + d];
            const double* w = &params_[proj_w + d * proj_in];
            for (std::size_t t = 0; t < proj_in; ++t) z += w[t] * proj_src[t];
            row[d] = z;
        }
        normalize_row_inplace(row);
        features.ids[i] = ids[i];
    }
    return features;
}

std::vector<double> StudentModel::backward(const Matrix& inputs, const Matrix& dfeatures) const {
    if (inputs.cols != config_.input_dim || dfeatures.cols != config_.out_dim ||
        inputs.rows != dfeatures.rows)
        throw Error(ErrorCode::DimMismatch, "backward shape mismatch");

    const std::size_t n = inputs.rows;
    const std::size_t in = config_.input_dim;
    const std::size_t hid = config_.hidden_dim;
    const std::size_t out = config_.out_dim;

    std::vector<double> grad(params_.size(), 0.0);
    std::vector<double> h(hid), z(out), dz(out), dh(hid);

    for (std::size_t i = 0; i < n; ++i) {
        auto x = inputs.row(i);
        const double* proj_src = x.data();
        std::size_t proj_in = in;
        if (is_mlp_) {
            for (std::size_t j = 0; j < hid; ++j) {
                double u = params_[b1_ + j];
                const double* w = &params_[w1_ + j * in];
                for (std::size_t t = 0; t < in; ++t) u += w[t] * x[t];
                h[j] = std::tanh(u);
            }
            proj_src = h.data();
            proj_in = hid;
        }
        for (std::size_t d = 0; d < out; ++d) {
            double v = params_[b2_ + d];
            const double* w = &params_[w2_ + d * proj_in];
            for (std::size_t t = 0; t < proj_in; ++t) v += w[t] * proj_src[t];
            z[d] = v;
        }
        double norm = l2_norm(z);
        if (norm < 1e-12) throw Error(ErrorCode::ZeroRow, "zero projection output");

        // Chain through s = z / ||z||.
        auto g = dfeatures.row(i);
        double proj = 0.0;
        for (std::size_t d = 0; d < out; ++d) proj += (z[d] / norm) * g[d];
        for (std::size_t d = 0; d < out; ++d) dz[d] = (g[d] - (z[d] / norm) * proj) / norm;

        for (std::size_t d = 0; d < out; ++d) {
            double* gw = &grad[w2_ + d * proj_in];
            for (std::size_t t = 0; t < proj_in; ++t) gw[t] += dz[d] * proj_src[t];
            grad[b2_ + d] += dz[d];
        }
        if (is_mlp_) {
            for (std::size_t j = 0; j < hid; ++j) {
                double acc = 0.0;
                for (std::size_t d = 0; d < out; ++d) acc += params_[w2_ + d * hid + j] * dz[d];
                dh[j] = acc * (1.0 - h[j] * h[j]);
            }
            for (std::size_t j = 0; j < hid; ++j) {
                double* gw = &grad[w1_ + j * in];
                for (std::size_t t = 0; t < in; ++t) gw[t] += dh[j] * x[t];
                grad[b1_ + j] += dh[j];
            }
        }
    }
    return grad;
}

std::string StudentModel::params_checksum() const {
    std::uint32_t c = crc32(params_.data(), params_.size() * sizeof(double));
    char hex[16];
    std::snprintf(hex, sizeof(hex), "%08x", c);
    return hex;
}

void StudentModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InputMissing, "cannot write " + path.string());
    out << "VLDS 1\n"
        << config_.backbone << ' ' << config_.input_dim << ' ' << config_.hidden_dim << ' '
        << config_.out_dim << ' ' << config_.seed << '\n';
    for (double v : params_) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        char buf[8];
        for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
        out.write(buf, 8);
    }
}

StudentModel StudentModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InputMissing, "cannot open " + path.string());
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "VLDS") throw Error(ErrorCode::CacheCorrupt, "bad student file " + path.string());
    if (version != 1) throw Error(ErrorCode::VersionUnsupported, std::to_string(version));

    StudentConfig config;
    in >> config.backbone >> config.input_dim >> config.hidden_dim >> config.out_dim >>
        config.seed;
    in.ignore(1, '\n');

    StudentModel model(config);
    for (double& v : model.params_) {
        char buf[8];
        in.read(buf, 8);
        if (!in) throw Error(ErrorCode::CacheCorrupt, "truncated student file " + path.string());
        std::uint64_t bits = 0;
        for (int b = 7; b >= 0; --b)
            bits = (bits << 8) | static_cast<unsigned char>(buf[b]);
        std::memcpy(&v, &bits, 8);
    }
    return model;
}

}  // namespace vld
