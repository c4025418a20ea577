// SPDX-License-Identifier: Apache-2.0
#include "dtcb/drl/mlp.hpp"
#include "dtcb/error.hpp"
#include "dtcb/kernels.hpp"

#include <cmath>
#include <random>

namespace dtcb::drl {

Mlp::Mlp(std::vector<int> widths, OutputActivation out, double output_scale)
    : widths_(std::move(widths)), out_(out), scale_(output_scale) {
    if (widths_.size() < 2) throw ConfigError("mlp: need at least input and output widths");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        if (widths_[l] < 1 || widths_[l + 1] < 1) throw ConfigError("mlp: layer widths must be positive");
        offsets_.push_back(total);
        total += static_cast<std::size_t>(widths_[l]) * static_cast<std::size_t>(widths_[l + 1]) +
                 static_cast<std::size_t>(widths_[l + 1]);
    }
    params_.assign(total, 0.0);
}

void Mlp::init(Rng& rng) {
    for (std::size_t l = 0; l < num_layers(); ++l) {
        const bool last = l + 1 == num_layers();
        const double bound = last ? 3e-3 : 1.0 / std::sqrt(static_cast<double>(widths_[l]));
        std::uniform_real_distribution<double> u(-bound, bound);
        const std::size_t begin = offsets_[l];
        const std::size_t end = bias_offset(l) + static_cast<std::size_t>(widths_[l + 1]);
        for (std::size_t i = begin; i < end; ++i) params_[i] = u(rng);
    }
}

Matrix Mlp::forward(const Matrix& x, Tape* tape) const {
    if (x.cols != static_cast<std::size_t>(input_width())) throw DataError("mlp: input width mismatch");
    const auto& k = kernels::active();
    if (tape) tape->inputs.clear();
    Matrix a = x;
    for (std::size_t l = 0; l < num_layers(); ++l) {
        const std::size_t in = static_cast<std::size_t>(widths_[l]);
        const std::size_t out = static_cast<std::size_t>(widths_[l + 1]);
        const double* W = params_.data() + offsets_[l];
        const double* b = params_.data() + bias_offset(l);
        const bool last = l + 1 == num_layers();
        Matrix z(a.rows, out);
        for (std::size_t i = 0; i < a.rows; ++i) {
            const double* xi = a.row(i);
            double* zi = z.row(i);
            for (std::size_t o = 0; o < out; ++o) {
                double v = b[o] + k.dot(W + o * in, xi, in);
                if (!last)
                    v = v > 0.0 ? v : 0.0;
                else if (out_ == OutputActivation::ScaledTanh)
                    v = scale_ * std::tanh(v);
                zi[o] = v;
            }
        }
        if (tape) tape->inputs.push_back(std::move(a));
        a = std::move(z);
    }
    if (tape) tape->output = a;
    return a;
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
    Matrix m(1, x.size());
    std::copy(x.begin(), x.end(), m.data.begin());
    return forward(m).data;
}

void Mlp::backward(const Tape& tape, const Matrix& dy, std::span<double> grad, Matrix* dx) const {
    if (grad.size() != params_.size()) throw DataError("mlp: gradient buffer has the wrong size");
    const auto& k = kernels::active();
    const std::size_t B = dy.rows;
    // Delta at the output pre-activation.
    Matrix delta = dy;
    if (out_ == OutputActivation::ScaledTanh) {
        for (std::size_t i = 0; i < delta.data.size(); ++i) {
            const double t = tape.output.data[i] / scale_;
            delta.data[i] *= scale_ * (1.0 - t * t);
        }
    }
    for (std::size_t l = num_layers(); l-- > 0;) {
        const std::size_t in = static_cast<std::size_t>(widths_[l]);
        const std::size_t out = static_cast<std::size_t>(widths_[l + 1]);
        const double* W = params_.data() + offsets_[l];
        double* gW = grad.data() + offsets_[l];
        double* gb = grad.data() + bias_offset(l);
        const Matrix& a = tape.inputs[l];
        const bool need_input_grad = l > 0 || dx != nullptr;
        Matrix da(need_input_grad ? B : 0, in);
        for (std::size_t i = 0; i < B; ++i) {
            const double* di = delta.row(i);
            const double* ai = a.row(i);
            for (std::size_t o = 0; o < out; ++o) {
                const double d = di[o];
                if (d == 0.0) continue;
                gb[o] += d;
                k.axpy(d, ai, gW + o * in, in);
                if (need_input_grad) k.axpy(d, W + o * in, da.row(i), in);
            }
        }
        if (l > 0) {
            // ReLU derivative: the layer input is the previous activation.
            for (std::size_t i = 0; i < da.data.size(); ++i)
                if (!(a.data[i] > 0.0)) da.data[i] = 0.0;
            delta = std::move(da);
        } else if (dx != nullptr) {
            *dx = std::move(da);
        }
    }
}

void Mlp::soft_update_from(const Mlp& source, double tau) {
    if (source.params_.size() != params_.size()) throw DataError("mlp: soft update between different shapes");
    for (std::size_t i = 0; i < params_.size(); ++i)
        params_[i] = (1.0 - tau) * params_[i] + tau * source.params_[i];
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) throw DataError("adam: size mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = b1_ * m_[i] + (1.0 - b1_) * grad[i];
        v_[i] = b2_ * v_[i] + (1.0 - b2_) * grad[i] * grad[i];
        const double mh = m_[i] / c1;
        const double vh = v_[i] / c2;
        params[i] -= lr_ * mh / (std::sqrt(vh) + eps_);
    }
}

} // namespace dtcb::drl
