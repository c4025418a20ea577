// SPDX-License-Identifier: Apache-2.0
#include "dtcb/drl/ddpg.hpp"
#include "dtcb/error.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <unordered_map>

namespace dtcb::drl {

void DdpgConfig::validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("ddpg: gamma must be in [0, 1]");
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("ddpg: tau must be in (0, 1]");
    if (batch_size < 1) throw ConfigError("ddpg: batch_size must be >= 1");
    if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw ConfigError("ddpg: learning rates must be > 0");
    if (episodes < 1 || steps_per_episode < 1) throw ConfigError("ddpg: episodes and steps must be >= 1");
    if (replay_capacity < static_cast<std::size_t>(batch_size))
        throw ConfigError("ddpg: replay capacity below the batch size");
    if (hidden_multiplier < 1) throw ConfigError("ddpg: hidden_multiplier must be >= 1");
    if (!(ou_theta > 0.0 && ou_theta <= 1.0)) throw ConfigError("ddpg: ou_theta must be in (0, 1]");
    if (!(ou_sigma >= 0.0) || !(ou_sigma_min >= 0.0)) throw ConfigError("ddpg: OU sigmas must be >= 0");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t width)
    : capacity_(capacity), width_(width), s_(capacity * width), a_(capacity * width), s2_(capacity * width),
      r_(capacity) {
    if (capacity == 0) throw ConfigError("replay buffer: capacity must be >= 1");
}

void ReplayBuffer::push(std::span<const double> s, std::span<const double> a, double r,
                        std::span<const double> s_next) {
    if (s.size() != width_ || a.size() != width_ || s_next.size() != width_)
        throw DataError("replay buffer: transition width mismatch");
    std::copy(s.begin(), s.end(), s_.begin() + static_cast<std::ptrdiff_t>(head_ * width_));
    std::copy(a.begin(), a.end(), a_.begin() + static_cast<std::ptrdiff_t>(head_ * width_));
    std::copy(s_next.begin(), s_next.end(), s2_.begin() + static_cast<std::ptrdiff_t>(head_ * width_));
    r_[head_] = r;
    head_ = (head_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
}

ReplayBuffer::Batch ReplayBuffer::sample(std::size_t n, Rng& rng) const {
    if (size_ == 0) throw DataError("replay buffer: sampling from an empty buffer");
    Batch b{Matrix(n, width_), Matrix(n, width_), Matrix(n, width_), std::vector<double>(n)};
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = pick(rng);
        std::copy_n(s_.begin() + static_cast<std::ptrdiff_t>(j * width_), width_, b.s.row(i));
        std::copy_n(a_.begin() + static_cast<std::ptrdiff_t>(j * width_), width_, b.a.row(i));
        std::copy_n(s2_.begin() + static_cast<std::ptrdiff_t>(j * width_), width_, b.s_next.row(i));
        b.r[i] = r_[j];
    }
    return b;
}

ReplayBuffer::Batch ReplayBuffer::at(std::size_t i) const {
    if (i >= size_) throw DataError("replay buffer: index out of range");
    const std::size_t j = size_ < capacity_ ? i : (head_ + i) % capacity_;
    Batch b{Matrix(1, width_), Matrix(1, width_), Matrix(1, width_), {r_[j]}};
    std::copy_n(s_.begin() + static_cast<std::ptrdiff_t>(j * width_), width_, b.s.row(0));
    std::copy_n(a_.begin() + static_cast<std::ptrdiff_t>(j * width_), width_, b.a.row(0));
    std::copy_n(s2_.begin() + static_cast<std::ptrdiff_t>(j * width_), width_, b.s_next.row(0));
    return b;
}

const std::vector<double>& OuNoise::step(Rng& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    for (double& v : x) v = v + theta * (0.0 - v) + sigma * n01(rng);
    return x;
}

Mlp make_actor(int M, int hidden_multiplier) {
    const int h = hidden_multiplier * M;
    return Mlp({M, h, h, M}, OutputActivation::ScaledTanh, kPi);
}

Mlp make_critic(int M, int hidden_multiplier) {
    const int h = hidden_multiplier * M;
    return Mlp({2 * M, h, h, 1}, OutputActivation::Identity);
}

namespace {

Matrix scaled(const Matrix& m) {
    Matrix out = m;
    for (double& v : out.data) v *= kPhaseScale;
    return out;
}

} // namespace

Matrix critic_input(const Matrix& states, const Matrix& actions) {
    if (states.rows != actions.rows || states.cols != actions.cols)
        throw DataError("critic input: state/action shape mismatch");
    const std::size_t M = states.cols;
    Matrix x(states.rows, 2 * M);
    for (std::size_t i = 0; i < states.rows; ++i) {
        for (std::size_t m = 0; m < M; ++m) {
            x(i, m) = states(i, m) * kPhaseScale;
            x(i, M + m) = actions(i, m) * kPhaseScale;
        }
    }
    return x;
}

double critic_mse(const Mlp& critic, const Matrix& states, const Matrix& actions, std::span<const double> targets,
                  std::span<double> grad) {
    const std::size_t B = states.rows;
    if (B == 0 || targets.size() != B) throw DataError("critic loss: empty batch or target size mismatch");
    Mlp::Tape tape;
    const Matrix q = critic.forward(critic_input(states, actions), grad.empty() ? nullptr : &tape);
    double loss = 0.0;
    Matrix dq(B, 1);
    for (std::size_t i = 0; i < B; ++i) {
        const double e = q.data[i] - targets[i];
        loss += e * e;
        dq.data[i] = 2.0 * e / static_cast<double>(B);
    }
    if (!grad.empty()) critic.backward(tape, dq, grad);
    return loss / static_cast<double>(B);
}

double actor_objective(const Mlp& actor, const Mlp& critic, const Matrix& states, std::span<double> grad) {
    const std::size_t B = states.rows;
    if (B == 0) throw DataError("actor objective: empty batch");
    const std::size_t M = states.cols;
    const bool want = !grad.empty();
    Mlp::Tape actor_tape;
    Mlp::Tape critic_tape;
    const Matrix actions = actor.forward(scaled(states), want ? &actor_tape : nullptr);
    const Matrix q = critic.forward(critic_input(states, actions), want ? &critic_tape : nullptr);
    double j = 0.0;
    for (double v : q.data) j += v;
    j /= static_cast<double>(B);
    if (!want) return j;

    Matrix dq(B, 1, 1.0 / static_cast<double>(B));
    std::vector<double> scratch(critic.num_params(), 0.0);
    Matrix dx;
    critic.backward(critic_tape, dq, scratch, &dx);
    // dJ/da = dJ/dx[action half] * d(x)/d(a).
    Matrix da(B, M);
    for (std::size_t i = 0; i < B; ++i)
        for (std::size_t m = 0; m < M; ++m) da(i, m) = dx(i, M + m) * kPhaseScale;
    actor.backward(actor_tape, da, grad);
    return j;
}

std::vector<double> quantize_action(std::span<const double> proto, const PhaseSet& ps) {
    std::vector<double> out(proto.size());
    for (std::size_t m = 0; m < proto.size(); ++m) out[m] = ps.nearest(proto[m]);
    return out;
}

int reward(double gain, double beta, double previous_gain) {
    if (gain > beta) return +1;
    if (gain > previous_gain) return +1;
    return -1;
}

double cluster_gain(const Beam& w, std::span<const ChannelVector> cluster) {
    if (cluster.empty()) throw DataError("cluster gain: empty cluster");
    return ChannelBlock(cluster, w.size()).mean_gain(w);
}

TrainerState::TrainerState(int M, const DdpgConfig& cfg)
    : state(static_cast<std::size_t>(M), 0.0),
      actor(make_actor(M, cfg.hidden_multiplier)),
      critic(make_critic(M, cfg.hidden_multiplier)),
      buffer(cfg.replay_capacity, static_cast<std::size_t>(M)),
      ou(static_cast<std::size_t>(M), cfg.ou_theta, cfg.ou_sigma),
      rng(cfg.seed) {
    actor.init(rng);
    critic.init(rng);
    actor_target = actor;
    critic_target = critic;
    actor_opt = Adam(actor.num_params(), cfg.actor_lr);
    critic_opt = Adam(critic.num_params(), cfg.critic_lr);
}

bool ddpg_update(TrainerState& ts, const DdpgConfig& cfg, UpdateParts parts) {
    const std::size_t B = static_cast<std::size_t>(cfg.batch_size);
    if (ts.buffer.size() < B) return false;
    const ReplayBuffer::Batch batch = ts.buffer.sample(B, ts.rng);

    if (parts.critic) {
        std::vector<double> y = batch.r;
        if (cfg.gamma != 0.0) {
            const Matrix next_a = ts.actor_target.forward(scaled(batch.s_next));
            const Matrix next_q = ts.critic_target.forward(critic_input(batch.s_next, next_a));
            for (std::size_t i = 0; i < B; ++i) y[i] += cfg.gamma * next_q.data[i];
        }
        std::vector<double> grad(ts.critic.num_params(), 0.0);
        critic_mse(ts.critic, batch.s, batch.a, y, grad);
        ts.critic_opt.step(ts.critic.params(), grad);
    }
    if (parts.actor) {
        std::vector<double> grad(ts.actor.num_params(), 0.0);
        actor_objective(ts.actor, ts.critic, batch.s, grad);
        // Ascend J.
        for (double& g : grad) g = -g;
        ts.actor_opt.step(ts.actor.params(), grad);
    }
    if (parts.targets) {
        ts.critic_target.soft_update_from(ts.critic, cfg.tau);
        ts.actor_target.soft_update_from(ts.actor, cfg.tau);
    }
    ++ts.updates;
    return true;
}

namespace {

std::vector<double> random_phases(std::size_t M, const PhaseSet& ps, Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, ps.size() - 1);
    std::vector<double> out(M);
    for (double& p : out) p = ps.values()[pick(rng)];
    return out;
}

} // namespace

TrainResult train_beam(std::span<const ChannelVector> cluster, const DdpgConfig& cfg, const PhaseSet& ps,
                       const ArrayConfig& array) {
    cfg.validate();
    array.validate();
    if (cluster.empty()) throw DataError("train_beam: empty cluster");
    const std::size_t M = static_cast<std::size_t>(array.num_antennas);
    const ChannelBlock block(cluster, M);

    TrainerState ts(array.num_antennas, cfg);
    ts.state = random_phases(M, ps, ts.rng);
    ts.best_beam = Beam(ts.state);

    TrainResult res;
    res.trace.reserve(static_cast<std::size_t>(cfg.total_steps()));
    const int total = cfg.total_steps();
    int t = 0;
    std::vector<double> proto(M);
    for (int ep = 0; ep < cfg.episodes; ++ep) {
        if (ep > 0) ts.state = random_phases(M, ps, ts.rng);
        ts.ou.reset();
        ts.previous_gain = block.mean_gain(Beam(ts.state));
        for (int step = 0; step < cfg.steps_per_episode; ++step, ++t) {
            const double frac = total > 1 ? static_cast<double>(t) / (total - 1) : 1.0;
            ts.ou.sigma = cfg.ou_sigma + (cfg.ou_sigma_min - cfg.ou_sigma) * frac;
            std::vector<double> input(M);
            for (std::size_t m = 0; m < M; ++m) input[m] = ts.state[m] * kPhaseScale;
            const std::vector<double> mu = ts.actor.forward(input);
            // Exploration noise lives in the actor's normalized output units.
            const std::vector<double>& noise = ts.ou.step(ts.rng);
            for (std::size_t m = 0; m < M; ++m) proto[m] = mu[m] + kPi * noise[m];
            std::vector<double> action = quantize_action(proto, ps);
            Beam beam(action);
            const double g = block.mean_gain(beam);
            const int r = reward(g, ts.beta, ts.previous_gain);
            if (g > ts.beta) {
                ts.beta = g;
                ts.best_beam = beam;
            }
            ts.buffer.push(ts.state, action, static_cast<double>(r), action);
            ts.state = std::move(action);
            ts.previous_gain = g;
            ddpg_update(ts, cfg);
            res.trace.push_back({t, g, r, ts.beta});
        }
    }
    res.beam = ts.best_beam;
    res.gain = ts.beta;
    return res;
}

LearnedCodebook learn_codebook(const Clustering& clusters, const ChannelDataset& ds, const DdpgConfig& cfg,
                               const PhaseSet& ps, const std::string& label_prefix, int jobs) {
    cfg.validate();
    std::unordered_map<std::int64_t, std::size_t> index;
    for (std::size_t i = 0; i < ds.records.size(); ++i) index.emplace(ds.records[i].user_id, i);

    const int N = clusters.num_clusters;
    std::vector<std::vector<ChannelVector>> members(static_cast<std::size_t>(N));
    for (std::size_t i = 0; i < clusters.assignments.size(); ++i) {
        auto it = index.find(clusters.user_ids[i]);
        if (it == index.end()) throw DataError("learn_codebook: clustered user missing from the dataset");
        members[static_cast<std::size_t>(clusters.assignments[i])].push_back(ds.records[it->second].channel);
    }

    struct Slot {
        bool present = false;
        bool zero = false;
        TrainResult result;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(N));
    auto run = [&](int c) {
        Slot& slot = slots[static_cast<std::size_t>(c)];
        const auto& chans = members[static_cast<std::size_t>(c)];
        if (chans.empty()) return;
        slot.present = true;
        DdpgConfig local = cfg;
        local.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(c));
        const bool all_zero = std::all_of(chans.begin(), chans.end(), [](const ChannelVector& h) {
            return std::all_of(h.h.begin(), h.h.end(), [](const cplx& x) { return x == cplx(0.0, 0.0); });
        });
        if (all_zero) {
            // Nothing to learn: every beam has zero gain on this cluster.
            Rng rng(local.seed);
            slot.zero = true;
            slot.result.beam = Beam(random_phases(static_cast<std::size_t>(ds.array.num_antennas), ps, rng));
            return;
        }
        slot.result = train_beam(chans, local, ps, ds.array);
    };

    if (jobs <= 1) {
        for (int c = 0; c < N; ++c) run(c);
    } else {
        for (int start = 0; start < N; start += jobs) {
            std::vector<std::future<void>> fs;
            for (int c = start; c < std::min(N, start + jobs); ++c) fs.push_back(std::async(std::launch::async, run, c));
            for (auto& f : fs) f.get();
        }
    }

    LearnedCodebook out;
    out.codebook.array = ds.array;
    out.codebook.phase_set = ps;
    for (int c = 0; c < N; ++c) {
        Slot& slot = slots[static_cast<std::size_t>(c)];
        const std::string label = label_prefix + std::to_string(c);
        if (!slot.present) {
            out.warnings.push_back("cluster " + label + " is empty; beam omitted");
            continue;
        }
        if (slot.zero) out.warnings.push_back("cluster " + label + " has only outage users; zero-gain beam");
        out.codebook.add(slot.result.beam, label, slot.zero);
        out.beam_cluster.push_back(c);
        out.traces.push_back(std::move(slot.result.trace));
    }
    return out;
}

json trace_to_json(std::span<const TraceRecord> trace) {
    json arr = json::array();
    for (const TraceRecord& r : trace) arr.push_back({{"t", r.t}, {"gain", r.gain}, {"reward", r.reward}, {"beta", r.beta}});
    return arr;
}

} // namespace dtcb::drl
