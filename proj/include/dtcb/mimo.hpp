// SPDX-License-Identifier: Apache-2.0
//
// Uniform linear array math: array response, geometric channel synthesis,
// unit-modulus beams, combining gain, SNR, and the classical baselines
// (DFT grid of beams, equal-gain combining bound, exhaustive quantized search).
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dtcb {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;

// Wraps an angle into (-pi, pi].
double wrap_phase(double x);

struct ArrayConfig {
    int num_antennas = 8;
    double antenna_spacing = 0.0;  // meters
    double carrier_frequency = 28e9;

    double wavelength() const { return kSpeedOfLight / carrier_frequency; }
    double wavenumber() const { return 2.0 * kPi / wavelength(); }

    // Throws ConfigError on M < 1, d <= 0 or f_c <= 0.
    void validate() const;

    static ArrayConfig half_wavelength(int num_antennas, double carrier_frequency);

    bool operator==(const ArrayConfig&) const = default;
};

// 2^r phase values uniformly spaced in (-pi, pi]: pi is included, -pi is not.
class PhaseSet {
public:
    explicit PhaseSet(int bits);

    int bits() const { return bits_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    double step() const { return 2.0 * kPi / static_cast<double>(values_.size()); }

    // Nearest value by absolute difference, ties toward the larger phase.
    double nearest(double phase) const;
    std::size_t nearest_index(double phase) const;
    bool contains(double phase) const;

    bool operator==(const PhaseSet& o) const { return bits_ == o.bits_; }

private:
    int bits_;
    std::vector<double> values_;
};

struct PathComponent {
    cplx gain;                 // alpha_l
    double angle_of_arrival;   // phi_l in [0, pi], measured from the array axis
    int interaction_count = 0; // 0 = line of sight
};

struct ChannelVector {
    std::vector<cplx> h;
    int path_count = 0;
    bool is_los = false;

    std::size_t size() const { return h.size(); }
    bool is_outage() const { return path_count == 0; }
};

// Analog combining vector w_m = exp(j theta_m) / sqrt(M).
class Beam {
public:
    Beam() = default;
    explicit Beam(std::vector<double> phases);

    std::size_t size() const { return phases_.size(); }
    const std::vector<double>& phases() const { return phases_; }
    const std::vector<cplx>& weights() const { return weights_; }
    // Split real/imag weights for the batched kernels.
    const std::vector<double>& weights_re() const { return re_; }
    const std::vector<double>& weights_im() const { return im_; }

    bool operator==(const Beam& o) const { return phases_ == o.phases_; }

private:
    std::vector<double> phases_;
    std::vector<cplx> weights_;
    std::vector<double> re_;
    std::vector<double> im_;
};

struct Codebook {
    ArrayConfig array;
    std::optional<PhaseSet> phase_set;  // empty for unquantized baselines
    std::vector<Beam> beams;
    std::vector<std::string> labels;    // one per beam, may be empty
    std::vector<bool> zero_gain;        // flagged beams learned from all-outage clusters

    std::size_t size() const { return beams.size(); }
    void add(Beam b, std::string label = {}, bool flagged = false);
};

struct LinkBudget {
    double eirp_dbm = 15.0;
    double noise_figure_db = 5.0;
    double bandwidth_hz = 100e6;

    double noise_dbm() const;
    double rho_db() const { return eirp_dbm - noise_dbm(); }
    double rho() const;
    void validate() const;
};

// Channels for batched gain evaluation, stored structure-of-arrays.
class ChannelBlock {
public:
    ChannelBlock() = default;
    ChannelBlock(std::span<const ChannelVector> channels, std::size_t num_antennas);
    ChannelBlock(std::span<const ChannelVector* const> channels, std::size_t num_antennas);

    std::size_t num_antennas() const { return M_; }
    std::size_t size() const { return K_; }
    bool empty() const { return K_ == 0; }

    // out[k] = |w^H h_k|^2, out.size() must equal size().
    void gains(const Beam& w, std::span<double> out) const;
    std::vector<double> gains(const Beam& w) const;
    double mean_gain(const Beam& w) const;

private:
    void push(const ChannelVector& c, std::size_t k);

    std::size_t M_ = 0;
    std::size_t K_ = 0;
    std::vector<double> re_;
    std::vector<double> im_;
};

std::vector<cplx> array_response(const ArrayConfig& cfg, double phi);

ChannelVector synth_channel(const ArrayConfig& cfg, std::span<const PathComponent> paths);

// |w^H h|^2. Throws DataError on dimension mismatch.
double combining_gain(const Beam& w, const ChannelVector& h);

struct Snr {
    double linear;
    double db;  // -infinity when linear == 0
};

Snr snr(const Beam& w, const ChannelVector& h, const LinkBudget& lb);
Snr snr_from_gain(double gain, const LinkBudget& lb);
double to_db(double linear);

struct BeamChoice {
    std::size_t index;
    double gain;
};

// Exhaustive search over the codebook, smallest index wins ties.
BeamChoice best_beam(const Codebook& cb, const ChannelVector& h);

Codebook dft_codebook(const ArrayConfig& cfg, int num_beams);

// (sum |h_m|)^2 / M: the largest |w^H h|^2 over unquantized unit-modulus w.
double egc_gain(const ChannelVector& h);

// Brute-force search of all 2^(r*M) quantized beams for the largest mean gain
// over the channel set. Test oracle; throws ConfigError above the cap.
struct ExhaustiveResult {
    Beam beam;
    double mean_gain;
};
ExhaustiveResult exhaustive_best_quantized_beam(const ArrayConfig& cfg, const PhaseSet& ps,
                                                std::span<const ChannelVector> channels,
                                                std::uint64_t enumeration_cap = 1ULL << 20);

} // namespace dtcb
