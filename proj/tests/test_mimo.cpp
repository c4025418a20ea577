// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "dtcb/error.hpp"
#include "dtcb/mimo.hpp"
#include "dtcb/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace dtcb;

namespace {

const ArrayConfig kHalf2 = ArrayConfig::half_wavelength(2, 28e9);
const ArrayConfig kHalf4 = ArrayConfig::half_wavelength(4, 28e9);

bool close(cplx a, cplx b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

ChannelVector random_channel(int M, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    ChannelVector h;
    for (int m = 0; m < M; ++m) h.h.emplace_back(g(rng), g(rng));
    h.path_count = 1;
    return h;
}

// Independent enumeration of all quantized beams: first digit fastest.
double brute_force_best(const ArrayConfig& cfg, const PhaseSet& ps, const std::vector<ChannelVector>& H) {
    const int M = cfg.num_antennas;
    const std::size_t Q = ps.size();
    std::size_t total = 1;
    for (int m = 0; m < M; ++m) total *= Q;
    double best = -1.0;
    for (std::size_t code = 0; code < total; ++code) {
        std::vector<double> th(static_cast<std::size_t>(M));
        std::size_t c = code;
        for (int m = 0; m < M; ++m) {
            th[static_cast<std::size_t>(m)] = ps.values()[c % Q];
            c /= Q;
        }
        double s = 0.0;
        for (const auto& h : H) {
            cplx acc = 0.0;
            for (int m = 0; m < M; ++m) acc += std::exp(cplx(0.0, -th[static_cast<std::size_t>(m)])) * h.h[static_cast<std::size_t>(m)];
            s += std::norm(acc) / M;
        }
        best = std::max(best, s / static_cast<double>(H.size()));
    }
    return best;
}

} // namespace

TEST_CASE("wrap_phase lands in (-pi, pi]") {
    CHECK(wrap_phase(kPi) == doctest::Approx(kPi));
    CHECK(wrap_phase(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_phase(3 * kPi / 2) == doctest::Approx(-kPi / 2));
    CHECK(wrap_phase(0.25) == doctest::Approx(0.25));
    for (double x = -20.0; x < 20.0; x += 0.37) {
        const double w = wrap_phase(x);
        CHECK(w > -kPi);
        CHECK(w <= kPi);
        CHECK(std::abs(std::remainder(w - x, 2 * kPi)) < 1e-9);
    }
}

TEST_CASE("array config validation") {
    ArrayConfig a = kHalf4;
    CHECK_NOTHROW(a.validate());
    a.num_antennas = 0;
    CHECK_THROWS_AS(a.validate(), ConfigError);
    a = kHalf4;
    a.antenna_spacing = 0.0;
    CHECK_THROWS_AS(a.validate(), ConfigError);
    a = kHalf4;
    a.carrier_frequency = -1.0;
    CHECK_THROWS_AS(a.validate(), ConfigError);
    CHECK(kHalf4.antenna_spacing == doctest::Approx(kHalf4.wavelength() / 2));
}

TEST_CASE("phase set values") {
    for (int r = 1; r <= 6; ++r) {
        const PhaseSet ps(r);
        REQUIRE(ps.size() == (std::size_t{1} << r));
        for (std::size_t i = 0; i < ps.size(); ++i) {
            CHECK(ps.values()[i] == doctest::Approx(-kPi + (i + 1) * 2 * kPi / ps.size()));
            if (i > 0) CHECK(ps.values()[i] > ps.values()[i - 1]);
        }
        CHECK(ps.values().back() == kPi);
        CHECK(ps.values().front() > -kPi);
        CHECK(ps.contains(kPi));
        CHECK_FALSE(ps.contains(-kPi));
    }
    const PhaseSet r2(2);
    CHECK(r2.values()[1] == 0.0);
    CHECK_THROWS_AS(PhaseSet(0), ConfigError);
}

TEST_CASE("phase set nearest value and tie rule") {
    const PhaseSet ps(2);  // {-pi/2, 0, pi/2, pi}
    CHECK(ps.nearest(0.3) == 0.0);
    CHECK(ps.nearest(kPi / 4) == doctest::Approx(kPi / 2));
    CHECK(ps.nearest(-kPi / 4) == 0.0);
    CHECK(ps.nearest(-3.0) == doctest::Approx(-kPi / 2));
    CHECK(ps.nearest(10.0) == kPi);
    for (double v : ps.values()) CHECK(ps.nearest(v) == v);
}

TEST_CASE("array response examples") {
    auto a = array_response(kHalf2, kPi / 2);
    CHECK(close(a[0], 1.0));
    CHECK(close(a[1], 1.0));
    a = array_response(kHalf2, 0.0);
    CHECK(close(a[1], -1.0));
    a = array_response(kHalf4, kPi / 3);
    CHECK(close(a[0], 1.0));
    CHECK(close(a[1], cplx(0, 1), 1e-9));
    CHECK(close(a[2], -1.0, 1e-9));
    CHECK(close(a[3], cplx(0, -1), 1e-9));
    for (double phi = 0.0; phi <= kPi; phi += 0.1)
        for (cplx x : array_response(kHalf4, phi)) CHECK(std::abs(x) == doctest::Approx(1.0));
}

TEST_CASE("channel synthesis") {
    ChannelVector h = synth_channel(kHalf2, {});
    CHECK(h.path_count == 0);
    CHECK(h.is_outage());
    CHECK(h.h == std::vector<cplx>(2, 0.0));
    const PathComponent p{1.0, kPi / 2, 0};
    h = synth_channel(kHalf2, std::vector<PathComponent>{p});
    CHECK(close(h.h[0], 1.0));
    CHECK(close(h.h[1], 1.0));
    CHECK(h.is_los);
    h = synth_channel(kHalf2, std::vector<PathComponent>{p, {-1.0, kPi / 2, 1}});
    CHECK(std::abs(h.h[0]) < 1e-15);
    CHECK(std::abs(h.h[1]) < 1e-15);
    CHECK(h.path_count == 2);
    h = synth_channel(kHalf2, std::vector<PathComponent>{{1.0, 1.0, 2}});
    CHECK_FALSE(h.is_los);
}

TEST_CASE("beam weights have unit norm") {
    Rng rng(3);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    for (int M : {1, 2, 7, 64}) {
        std::vector<double> th(static_cast<std::size_t>(M));
        for (double& x : th) x = u(rng);
        const Beam b(th);
        double n2 = 0.0;
        for (std::size_t m = 0; m < b.size(); ++m) {
            n2 += std::norm(b.weights()[m]);
            CHECK(b.weights_re()[m] == b.weights()[m].real());
            CHECK(b.weights_im()[m] == b.weights()[m].imag());
        }
        CHECK(std::abs(n2 - 1.0) < 1e-12);
    }
}

TEST_CASE("combining gain examples") {
    const cplx alpha(0.3, -0.4);
    const double phi = 1.1;
    std::vector<PathComponent> p{{alpha, phi, 0}};
    const ChannelVector h = synth_channel(kHalf4, p);
    std::vector<double> th;
    for (cplx x : h.h) th.push_back(std::arg(x));
    CHECK(combining_gain(Beam(th), h) == doctest::Approx(4 * std::norm(alpha)).epsilon(1e-12));

    ChannelVector zero;
    zero.h.assign(4, 0.0);
    CHECK(combining_gain(Beam(th), zero) == 0.0);

    ChannelVector hm;
    hm.h = {1.0, -1.0};
    CHECK(combining_gain(Beam({0.0, 0.0}), hm) == doctest::Approx(0.0));
    CHECK_THROWS_AS(combining_gain(Beam({0.0}), hm), DataError);
}

TEST_CASE("link budget and snr") {
    const LinkBudget lb;
    CHECK(lb.noise_dbm() == doctest::Approx(-89.0));
    CHECK(lb.rho_db() == doctest::Approx(104.0));
    CHECK(lb.rho() == doctest::Approx(std::pow(10.0, 10.4)));
    const Snr s = snr_from_gain(1.0, lb);
    CHECK(s.db == doctest::Approx(104.0));
    const Snr z = snr_from_gain(0.0, lb);
    CHECK(z.linear == 0.0);
    CHECK(std::isinf(z.db));
    CHECK(z.db < 0);
    LinkBudget unit;
    unit.eirp_dbm = unit.noise_dbm();
    CHECK(snr_from_gain(0.25, unit).linear == doctest::Approx(0.25));
    LinkBudget bad;
    bad.bandwidth_hz = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("best beam selection") {
    ChannelVector h;
    h.h = {1.0, 1.0};
    h.path_count = 1;
    Codebook cb;
    cb.array = kHalf2;
    cb.add(Beam({0.0, kPi}));
    cb.add(Beam({0.0, 0.0}));
    CHECK(best_beam(cb, h).index == 1);

    ChannelVector zero;
    zero.h.assign(2, 0.0);
    const BeamChoice c = best_beam(cb, zero);
    CHECK(c.index == 0);
    CHECK(c.gain == 0.0);

    Codebook empty;
    CHECK_THROWS_AS(best_beam(empty, h), DataError);

    Rng rng(9);
    const auto cfg = ArrayConfig::half_wavelength(6, 28e9);
    const Codebook dft = dft_codebook(cfg, 8);
    for (int trial = 0; trial < 20; ++trial) {
        const ChannelVector r = random_channel(6, rng);
        std::size_t idx = 0;
        double best = -1.0;
        for (std::size_t n = 0; n < dft.beams.size(); ++n) {
            const double g = combining_gain(dft.beams[n], r);
            if (g > best) {
                best = g;
                idx = n;
            }
        }
        const BeamChoice bc = best_beam(dft, r);
        CHECK(bc.index == idx);
        CHECK(bc.gain == best);
        for (const Beam& w : dft.beams) CHECK(bc.gain >= combining_gain(w, r));
    }
}

TEST_CASE("DFT codebook") {
    Codebook cb = dft_codebook(kHalf2, 2);
    REQUIRE(cb.beams.size() == 2);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(close(cb.beams[0].weights()[0], s));
    CHECK(close(cb.beams[0].weights()[1], s));
    CHECK(close(cb.beams[1].weights()[1], -s));
    CHECK_FALSE(cb.phase_set.has_value());

    cb = dft_codebook(kHalf4, 4);
    for (int n = 0; n < 4; ++n)
        for (int m = 0; m < 4; ++m)
            CHECK(cb.beams[static_cast<std::size_t>(n)].phases()[static_cast<std::size_t>(m)] ==
                  doctest::Approx(wrap_phase(-kPi * m * n / 2.0)));

    const auto cfg8 = ArrayConfig::half_wavelength(8, 28e9);
    cb = dft_codebook(cfg8, 8);
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 8; ++j) {
            cplx ip = 0.0;
            for (std::size_t m = 0; m < 8; ++m) ip += std::conj(cb.beams[i].weights()[m]) * cb.beams[j].weights()[m];
            if (i == j)
                CHECK(std::abs(ip) == doctest::Approx(1.0));
            else
                CHECK(std::abs(ip) < 1e-10);
        }
    }
    CHECK_THROWS_AS(dft_codebook(cfg8, 0), ConfigError);
}

TEST_CASE("equal-gain bound") {
    CHECK(egc_gain(synth_channel(kHalf4, std::vector<PathComponent>{{1.0, 0.7, 0}})) == doctest::Approx(4.0));
    ChannelVector zero;
    zero.h.assign(3, 0.0);
    CHECK(egc_gain(zero) == 0.0);

    Rng rng(77);
    const PhaseSet ps(2);
    for (int trial = 0; trial < 10; ++trial) {
        const ChannelVector h = random_channel(3, rng);
        const double bound = egc_gain(h);
        for (double a : ps.values())
            for (double b : ps.values())
                for (double c : ps.values()) CHECK(combining_gain(Beam({a, b, c}), h) <= bound * (1 + 1e-12));
    }
}

TEST_CASE("exhaustive quantized search") {
    const PhaseSet ps(2);
    ChannelVector h;
    h.h = {std::exp(cplx(0, kPi / 2)), std::exp(cplx(0, kPi)), 1.0, std::exp(cplx(0, -kPi / 2))};
    h.path_count = 1;
    const auto r = exhaustive_best_quantized_beam(kHalf4, ps, std::vector<ChannelVector>{h});
    CHECK(r.mean_gain == doctest::Approx(4.0));
    // Optimal up to a common phase rotation of the matched beam.
    const double rot = r.beam.phases()[0] - kPi / 2;
    const std::vector<double> matched{kPi / 2, kPi, 0.0, -kPi / 2};
    for (std::size_t m = 0; m < 4; ++m) CHECK(std::abs(wrap_phase(r.beam.phases()[m] - matched[m] - rot)) < 1e-12);

    Rng rng(4);
    const PhaseSet ps1(1);
    std::vector<ChannelVector> one{synth_channel(kHalf2, std::vector<PathComponent>{{cplx(0.2, 0.1), 0.9, 0}})};
    CHECK(exhaustive_best_quantized_beam(kHalf2, ps1, one).mean_gain ==
          doctest::Approx(brute_force_best(kHalf2, ps1, one)).epsilon(1e-12));

    std::vector<ChannelVector> ten;
    for (int i = 0; i < 10; ++i) ten.push_back(random_channel(4, rng));
    const auto best = exhaustive_best_quantized_beam(kHalf4, ps, ten);
    CHECK(best.mean_gain == doctest::Approx(brute_force_best(kHalf4, ps, ten)).epsilon(1e-12));

    auto shuffled = ten;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto again = exhaustive_best_quantized_beam(kHalf4, ps, shuffled);
    CHECK(again.beam == best.beam);
    CHECK(again.mean_gain == best.mean_gain);

    const auto cfg16 = ArrayConfig::half_wavelength(16, 28e9);
    std::vector<ChannelVector> big{random_channel(16, rng)};
    CHECK_THROWS_AS(exhaustive_best_quantized_beam(cfg16, ps, big), ConfigError);
    CHECK_THROWS_AS(exhaustive_best_quantized_beam(kHalf4, ps, std::vector<ChannelVector>{}), DataError);
}

TEST_CASE("ChannelBlock mean gain equals per-channel average") {
    Rng rng(12);
    std::vector<ChannelVector> H;
    for (int i = 0; i < 5; ++i) H.push_back(random_channel(4, rng));
    const Beam w({0.1, 0.2, -0.3, 1.0});
    const ChannelBlock blk(H, 4);
    double s = 0.0;
    for (const auto& h : H) s += combining_gain(w, h);
    CHECK(blk.mean_gain(w) == doctest::Approx(s / 5).epsilon(1e-14));
    CHECK_THROWS_AS(ChannelBlock(H, 3), DataError);
}
