// SPDX-License-Identifier: Apache-2.0
#include "dtcb/mimo.hpp"
#include "dtcb/error.hpp"
#include "dtcb/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dtcb {

double wrap_phase(double x) {
    double y = std::fmod(x + kPi, 2.0 * kPi);
    if (y <= 0.0) y += 2.0 * kPi;
    return y - kPi;
}

void ArrayConfig::validate() const {
    if (num_antennas < 1) throw ConfigError("array: num_antennas must be >= 1");
    if (!(antenna_spacing > 0.0)) throw ConfigError("array: antenna_spacing must be > 0");
    if (!(carrier_frequency > 0.0)) throw ConfigError("array: carrier_frequency must be > 0");
}

ArrayConfig ArrayConfig::half_wavelength(int num_antennas, double carrier_frequency) {
    ArrayConfig cfg;
    cfg.num_antennas = num_antennas;
    cfg.carrier_frequency = carrier_frequency;
    cfg.antenna_spacing = 0.5 * kSpeedOfLight / carrier_frequency;
    return cfg;
}

PhaseSet::PhaseSet(int bits) : bits_(bits) {
    if (bits < 1 || bits > 16) throw ConfigError("phase set: bits must be in [1, 16]");
    const long n = 1L << bits;
    const long half = n / 2;
    const double step = 2.0 * kPi / static_cast<double>(n);
    values_.reserve(static_cast<std::size_t>(n));
    // (i - n/2) * step for i = 1..n keeps 0 and pi exact.
    for (long i = 1; i <= n; ++i) values_.push_back(static_cast<double>(i - half) * step);
}

std::size_t PhaseSet::nearest_index(double phase) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double d = std::abs(values_[i] - phase);
        if (d <= best_d) {  // ascending values: ties go to the larger phase
            best_d = d;
            best = i;
        }
    }
    return best;
}

double PhaseSet::nearest(double phase) const { return values_[nearest_index(phase)]; }

bool PhaseSet::contains(double phase) const {
    return std::find(values_.begin(), values_.end(), phase) != values_.end();
}

Beam::Beam(std::vector<double> phases) : phases_(std::move(phases)) {
    const std::size_t M = phases_.size();
    const double scale = 1.0 / std::sqrt(static_cast<double>(M));
    weights_.resize(M);
    re_.resize(M);
    im_.resize(M);
    for (std::size_t m = 0; m < M; ++m) {
        re_[m] = scale * std::cos(phases_[m]);
        im_[m] = scale * std::sin(phases_[m]);
        weights_[m] = cplx(re_[m], im_[m]);
    }
}

void Codebook::add(Beam b, std::string label, bool flagged) {
    if (b.size() != static_cast<std::size_t>(array.num_antennas))
        throw DataError("codebook: beam width does not match the array");
    beams.push_back(std::move(b));
    labels.push_back(std::move(label));
    zero_gain.push_back(flagged);
}

double LinkBudget::noise_dbm() const {
    return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

double LinkBudget::rho() const { return std::pow(10.0, rho_db() / 10.0); }

void LinkBudget::validate() const {
    if (!(bandwidth_hz > 0.0)) throw ConfigError("link budget: bandwidth_hz must be > 0");
    if (!std::isfinite(eirp_dbm) || !std::isfinite(noise_figure_db))
        throw ConfigError("link budget: non-finite power values");
}

ChannelBlock::ChannelBlock(std::span<const ChannelVector> channels, std::size_t num_antennas)
    : M_(num_antennas), K_(channels.size()), re_(M_ * K_), im_(M_ * K_) {
    for (std::size_t k = 0; k < K_; ++k) push(channels[k], k);
}

ChannelBlock::ChannelBlock(std::span<const ChannelVector* const> channels, std::size_t num_antennas)
    : M_(num_antennas), K_(channels.size()), re_(M_ * K_), im_(M_ * K_) {
    for (std::size_t k = 0; k < K_; ++k) push(*channels[k], k);
}

void ChannelBlock::push(const ChannelVector& c, std::size_t k) {
    if (c.size() != M_) throw DataError("channel block: channel width does not match the array");
    for (std::size_t m = 0; m < M_; ++m) {
        re_[m * K_ + k] = c.h[m].real();
        im_[m * K_ + k] = c.h[m].imag();
    }
}

void ChannelBlock::gains(const Beam& w, std::span<double> out) const {
    if (w.size() != M_) throw DataError("beam width does not match the channels");
    if (out.size() != K_) throw DataError("gain output has the wrong length");
    if (K_ == 0) return;
    kernels::active().beam_gains(w.weights_re().data(), w.weights_im().data(), M_, re_.data(),
                                 im_.data(), K_, out.data());
}

std::vector<double> ChannelBlock::gains(const Beam& w) const {
    std::vector<double> out(K_);
    gains(w, out);
    return out;
}

double ChannelBlock::mean_gain(const Beam& w) const {
    if (K_ == 0) throw DataError("mean gain over an empty channel set");
    const std::vector<double> g = gains(w);
    double sum = 0.0;
    for (double x : g) sum += x;
    return sum / static_cast<double>(K_);
}

std::vector<cplx> array_response(const ArrayConfig& cfg, double phi) {
    const double kd = cfg.wavenumber() * cfg.antenna_spacing * std::cos(phi);
    std::vector<cplx> a(static_cast<std::size_t>(cfg.num_antennas));
    for (int m = 0; m < cfg.num_antennas; ++m) a[m] = std::polar(1.0, kd * m);
    return a;
}

ChannelVector synth_channel(const ArrayConfig& cfg, std::span<const PathComponent> paths) {
    ChannelVector out;
    out.h.assign(static_cast<std::size_t>(cfg.num_antennas), cplx(0.0, 0.0));
    out.path_count = static_cast<int>(paths.size());
    for (const PathComponent& p : paths) {
        const std::vector<cplx> a = array_response(cfg, p.angle_of_arrival);
        for (std::size_t m = 0; m < a.size(); ++m) out.h[m] += p.gain * a[m];
        if (p.interaction_count == 0) out.is_los = true;
    }
    return out;
}

double combining_gain(const Beam& w, const ChannelVector& h) {
    if (w.size() != h.size()) throw DataError("combining gain: beam and channel widths differ");
    const auto& wr = w.weights_re();
    const auto& wi = w.weights_im();
    double acc_re = 0.0;
    double acc_im = 0.0;
    for (std::size_t m = 0; m < w.size(); ++m) {
        const double hr = h.h[m].real();
        const double hi = h.h[m].imag();
        const double pr = wr[m] * hr + wi[m] * hi;
        const double pi = wr[m] * hi - wi[m] * hr;
        acc_re = acc_re + pr;
        acc_im = acc_im + pi;
    }
    return acc_re * acc_re + acc_im * acc_im;
}

double to_db(double linear) {
    if (linear <= 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(linear);
}

Snr snr_from_gain(double gain, const LinkBudget& lb) {
    const double lin = gain * lb.rho();
    return {lin, to_db(lin)};
}

Snr snr(const Beam& w, const ChannelVector& h, const LinkBudget& lb) {
    return snr_from_gain(combining_gain(w, h), lb);
}

BeamChoice best_beam(const Codebook& cb, const ChannelVector& h) {
    if (cb.beams.empty()) throw DataError("best_beam: empty codebook");
    BeamChoice best{0, combining_gain(cb.beams[0], h)};
    for (std::size_t n = 1; n < cb.beams.size(); ++n) {
        const double g = combining_gain(cb.beams[n], h);
        if (g > best.gain) best = {n, g};
    }
    return best;
}

Codebook dft_codebook(const ArrayConfig& cfg, int num_beams) {
    if (num_beams < 1) throw ConfigError("dft codebook: need at least one beam");
    Codebook cb;
    cb.array = cfg;
    const int M = cfg.num_antennas;
    for (int n = 0; n < num_beams; ++n) {
        std::vector<double> phases(static_cast<std::size_t>(M));
        for (int m = 0; m < M; ++m)
            phases[m] = wrap_phase(-2.0 * kPi * static_cast<double>(m) * n / num_beams);
        cb.add(Beam(std::move(phases)), "dft-" + std::to_string(n));
    }
    return cb;
}

double egc_gain(const ChannelVector& h) {
    if (h.h.empty()) return 0.0;
    double s = 0.0;
    for (const cplx& x : h.h) s += std::abs(x);
    return s * s / static_cast<double>(h.size());
}

ExhaustiveResult exhaustive_best_quantized_beam(const ArrayConfig& cfg, const PhaseSet& ps,
                                                std::span<const ChannelVector> channels,
                                                std::uint64_t enumeration_cap) {
    cfg.validate();
    if (channels.empty()) throw DataError("exhaustive search: empty channel set");
    const int M = cfg.num_antennas;
    const std::uint64_t bits = static_cast<std::uint64_t>(ps.bits()) * static_cast<std::uint64_t>(M);
    if (bits >= 63 || (1ULL << bits) > enumeration_cap)
        throw ConfigError("exhaustive search: 2^(r*M) exceeds the enumeration cap");

    // Canonical channel order makes the floating-point mean independent of
    // the caller's ordering.
    std::vector<ChannelVector> sorted(channels.begin(), channels.end());
    std::sort(sorted.begin(), sorted.end(), [](const ChannelVector& a, const ChannelVector& b) {
        for (std::size_t m = 0; m < a.size(); ++m) {
            if (a.h[m].real() != b.h[m].real()) return a.h[m].real() < b.h[m].real();
            if (a.h[m].imag() != b.h[m].imag()) return a.h[m].imag() < b.h[m].imag();
        }
        return false;
    });
    const ChannelBlock block(std::span<const ChannelVector>(sorted), static_cast<std::size_t>(M));

    const std::size_t Q = ps.size();
    std::vector<std::size_t> digits(static_cast<std::size_t>(M), 0);
    std::vector<double> phases(static_cast<std::size_t>(M));
    ExhaustiveResult best{Beam(), -1.0};
    const std::uint64_t total = 1ULL << bits;
    for (std::uint64_t it = 0; it < total; ++it) {
        for (int m = 0; m < M; ++m) phases[m] = ps.values()[digits[m]];
        Beam b(phases);
        const double g = block.mean_gain(b);
        if (g > best.mean_gain) best = {std::move(b), g};
        for (int m = M - 1; m >= 0; --m) {
            if (++digits[m] < Q) break;
            digits[m] = 0;
        }
    }
    return best;
}

} // namespace dtcb
