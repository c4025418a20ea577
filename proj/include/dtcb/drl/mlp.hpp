// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dtcb/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace dtcb::drl {

// Row-major batch of row vectors.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

enum class OutputActivation { Identity, ScaledTanh };

// Fully connected network, ReLU on hidden layers. All weights and biases
// live in one flat parameter vector (layer by layer: W row-major, then b).
class Mlp {
public:
    Mlp() = default;
    Mlp(std::vector<int> widths, OutputActivation out, double output_scale = 1.0);

    // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)); the output layer uses
    // Uniform(-3e-3, 3e-3).
    void init(Rng& rng);

    int input_width() const { return widths_.front(); }
    int output_width() const { return widths_.back(); }
    std::size_t num_layers() const { return widths_.size() - 1; }
    const std::vector<int>& widths() const { return widths_; }
    OutputActivation output_activation() const { return out_; }
    double output_scale() const { return scale_; }

    std::size_t num_params() const { return params_.size(); }
    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }
    // Offsets of layer l's weights and biases inside params().
    std::size_t weight_offset(std::size_t l) const { return offsets_[l]; }
    std::size_t bias_offset(std::size_t l) const {
        return offsets_[l] + static_cast<std::size_t>(widths_[l]) * static_cast<std::size_t>(widths_[l + 1]);
    }

    // Intermediate activations kept for backward().
    struct Tape {
        std::vector<Matrix> inputs;  // input to each layer
        Matrix output;
    };

    // Throws DataError on an input width mismatch.
    Matrix forward(const Matrix& x, Tape* tape = nullptr) const;
    std::vector<double> forward(std::span<const double> x) const;

    // Backpropagates dLoss/dOutput. Adds dLoss/dParams into `grad`
    // (length num_params()); writes dLoss/dInput into `dx` when non-null.
    void backward(const Tape& tape, const Matrix& dy, std::span<double> grad, Matrix* dx = nullptr) const;

    // target <- (1 - tau) * target + tau * source, parameter-wise.
    void soft_update_from(const Mlp& source, double tau);

private:
    std::vector<int> widths_;
    OutputActivation out_ = OutputActivation::Identity;
    double scale_ = 1.0;
    std::vector<std::size_t> offsets_;
    std::vector<double> params_;
};

class Adam {
public:
    Adam() = default;
    Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    // Descent step: params -= lr * m_hat / (sqrt(v_hat) + eps).
    void step(std::span<double> params, std::span<const double> grad);
    double learning_rate() const { return lr_; }

private:
    double lr_ = 1e-3, b1_ = 0.9, b2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
    std::vector<double> m_, v_;
};

} // namespace dtcb::drl
