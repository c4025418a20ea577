// SPDX-License-Identifier: Apache-2.0
//
// DDPG agent that searches for one quantized-phase beam maximizing the mean
// combining gain of a cluster of channels.
//
// State: current phase vector (length M). Action: next phase vector, i.e.
// the actor's proto-action pi*tanh(.) plus exploration noise, snapped to the
// phase set. Reward: +1 when the cluster gain beats the running maximum
// beta, else +1 when it beats the previous gain, else -1. Every beam that
// raises beta becomes the best-so-far beam.
#pragma once

#include "dtcb/clustering.hpp"
#include "dtcb/dataset.hpp"
#include "dtcb/drl/mlp.hpp"
#include "dtcb/mimo.hpp"
#include "dtcb/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dtcb::drl {

struct DdpgConfig {
    double gamma = 0.99;
    double tau = 0.005;
    int batch_size = 64;
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    int episodes = 32;
    int steps_per_episode = 64;
    std::size_t replay_capacity = 8192;
    int hidden_multiplier = 16;  // hidden width = multiplier * M
    double ou_theta = 0.15;
    double ou_sigma = 0.2;       // initial; decays linearly to ou_sigma_min
    double ou_sigma_min = 0.02;
    std::uint64_t seed = 0;

    int total_steps() const { return episodes * steps_per_episode; }
    void validate() const;
};

class ReplayBuffer {
public:
    ReplayBuffer() = default;
    ReplayBuffer(std::size_t capacity, std::size_t width);

    void push(std::span<const double> s, std::span<const double> a, double r, std::span<const double> s_next);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t width() const { return width_; }

    struct Batch {
        Matrix s, a, s_next;
        std::vector<double> r;
    };
    // Uniform sampling with replacement.
    Batch sample(std::size_t n, Rng& rng) const;
    // Slot i in insertion order, oldest first.
    Batch at(std::size_t i) const;

private:
    std::size_t capacity_ = 0, width_ = 0, size_ = 0, head_ = 0;
    std::vector<double> s_, a_, s2_, r_;
};

// x <- x + theta (mu - x) + sigma N(0, I), mu = 0.
struct OuNoise {
    std::vector<double> x;
    double theta = 0.15;
    double sigma = 0.2;

    OuNoise() = default;
    OuNoise(std::size_t width, double theta_, double sigma_) : x(width, 0.0), theta(theta_), sigma(sigma_) {}
    const std::vector<double>& step(Rng& rng);
    void reset() { std::fill(x.begin(), x.end(), 0.0); }
};

// Network inputs are phases divided by pi.
inline constexpr double kPhaseScale = 1.0 / kPi;

Mlp make_actor(int num_antennas, int hidden_multiplier);
Mlp make_critic(int num_antennas, int hidden_multiplier);

Matrix critic_input(const Matrix& states, const Matrix& actions);

// Mean squared error (y_i - Q(s_i, a_i))^2; accumulates dL/dparams into
// grad when it is non-empty.
double critic_mse(const Mlp& critic, const Matrix& states, const Matrix& actions,
                  std::span<const double> targets, std::span<double> grad);

// J = mean Q(s_i, mu(s_i)); accumulates dJ/dactor_params into grad when it
// is non-empty.
double actor_objective(const Mlp& actor, const Mlp& critic, const Matrix& states, std::span<double> grad);

// Elementwise nearest phase-set value.
std::vector<double> quantize_action(std::span<const double> proto, const PhaseSet& ps);

int reward(double gain, double beta, double previous_gain);

// Mean |w^H h|^2 over a non-empty cluster; throws DataError when empty.
double cluster_gain(const Beam& w, std::span<const ChannelVector> cluster);

struct TraceRecord {
    int t;
    double gain;
    int reward;
    double beta;
};

struct TrainerState {
    std::vector<double> state;
    double beta = 0.0;
    double previous_gain = 0.0;
    Beam best_beam;
    Mlp actor, critic, actor_target, critic_target;
    Adam actor_opt, critic_opt;
    ReplayBuffer buffer;
    OuNoise ou;
    Rng rng;
    long updates = 0;

    TrainerState(int num_antennas, const DdpgConfig& cfg);
};

struct UpdateParts {
    bool critic = true;
    bool actor = true;
    bool targets = true;
};

// One minibatch update. Returns false (and leaves the state untouched) when
// the buffer holds fewer than batch_size transitions.
bool ddpg_update(TrainerState& ts, const DdpgConfig& cfg, UpdateParts parts = {});

struct TrainResult {
    Beam beam;
    double gain = 0.0;  // cluster gain of `beam`, equal to the final beta
    std::vector<TraceRecord> trace;
};

TrainResult train_beam(std::span<const ChannelVector> cluster, const DdpgConfig& cfg, const PhaseSet& ps,
                       const ArrayConfig& array);

struct LearnedCodebook {
    Codebook codebook;
    std::vector<int> beam_cluster;             // cluster index per beam
    std::vector<std::vector<TraceRecord>> traces;
    std::vector<std::string> warnings;
};

// One beam per non-empty cluster, trained with seed derive_seed(cfg.seed, c).
// Clusters whose channels are all zero yield a flagged zero-gain beam.
LearnedCodebook learn_codebook(const Clustering& clusters, const ChannelDataset& ds, const DdpgConfig& cfg,
                               const PhaseSet& ps, const std::string& label_prefix = "c", int jobs = 1);

json trace_to_json(std::span<const TraceRecord> trace);

} // namespace dtcb::drl
