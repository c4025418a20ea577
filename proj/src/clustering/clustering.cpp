// SPDX-License-Identifier: Apache-2.0
#include "dtcb/clustering.hpp"
#include "dtcb/error.hpp"
#include "dtcb/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace dtcb {

namespace {

double sq_dist(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

// Points laid out point-major (K x D) for cache-friendly distance loops.
struct Points {
    std::size_t count;
    std::size_t dim;
    std::vector<double> data;
    const double* operator[](std::size_t k) const { return data.data() + k * dim; }
};

Points transpose_columns(const SensingMatrix& P, bool normalize) {
    Points pts{P.cols, P.rows, std::vector<double>(P.cols * P.rows)};
    for (std::size_t k = 0; k < P.cols; ++k) {
        double norm = 0.0;
        for (std::size_t s = 0; s < P.rows; ++s) {
            pts.data[k * P.rows + s] = P(s, k);
            norm += P(s, k) * P(s, k);
        }
        if (normalize && norm > 0.0) {
            const double inv = 1.0 / std::sqrt(norm);
            for (std::size_t s = 0; s < P.rows; ++s) pts.data[k * P.rows + s] *= inv;
        }
    }
    return pts;
}

std::vector<double> kmeanspp_init(const Points& pts, int N, Rng& rng) {
    const std::size_t K = pts.count;
    const std::size_t D = pts.dim;
    std::vector<double> centers;
    centers.reserve(static_cast<std::size_t>(N) * D);
    std::uniform_int_distribution<std::size_t> pick(0, K - 1);
    std::size_t first = pick(rng);
    centers.insert(centers.end(), pts[first], pts[first] + D);

    std::vector<double> d2(K);
    for (std::size_t k = 0; k < K; ++k) d2[k] = sq_dist(pts[k], centers.data(), D);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int c = 1; c < N; ++c) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t chosen = 0;
        if (total > 0.0) {
            const double target = unit(rng) * total;
            double acc = 0.0;
            chosen = K - 1;
            for (std::size_t k = 0; k < K; ++k) {
                acc += d2[k];
                if (acc > target && d2[k] > 0.0) {
                    chosen = k;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        const double* p = pts[chosen];
        centers.insert(centers.end(), p, p + D);
        const double* newest = centers.data() + static_cast<std::size_t>(c) * D;
        for (std::size_t k = 0; k < K; ++k) d2[k] = std::min(d2[k], sq_dist(pts[k], newest, D));
    }
    return centers;
}

} // namespace

SensingSet gen_sensing_beams(const ArrayConfig& cfg, const PhaseSet& ps, int num_beams, std::uint64_t seed) {
    cfg.validate();
    if (num_beams < 1) throw ConfigError("sensing: need at least one sensing beam");
    SensingSet set;
    set.seed = seed;
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, ps.size() - 1);
    for (int s = 0; s < num_beams; ++s) {
        std::vector<double> phases(static_cast<std::size_t>(cfg.num_antennas));
        for (double& p : phases) p = ps.values()[pick(rng)];
        set.beams.emplace_back(std::move(phases));
    }
    return set;
}

std::vector<double> SensingMatrix::column(std::size_t k) const {
    std::vector<double> c(rows);
    for (std::size_t s = 0; s < rows; ++s) c[s] = (*this)(s, k);
    return c;
}

SensingMatrix build_sensing_matrix(const SensingSet& sensing, const ChannelDataset& ds) {
    const std::size_t M = static_cast<std::size_t>(ds.array.num_antennas);
    for (const Beam& f : sensing.beams)
        if (f.size() != M) throw DataError("sensing matrix: sensing beam width does not match the dataset");
    SensingMatrix P;
    P.rows = sensing.beams.size();
    P.cols = ds.records.size();
    P.values.resize(P.rows * P.cols);
    for (const ChannelRecord& r : ds.records) P.user_ids.push_back(r.user_id);
    const ChannelBlock block = ds.block();
    for (std::size_t s = 0; s < P.rows; ++s)
        block.gains(sensing.beams[s], std::span<double>(P.values.data() + s * P.cols, P.cols));
    return P;
}

std::vector<std::size_t> Clustering::members(int cluster) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] == cluster) out.push_back(i);
    return out;
}

std::vector<std::size_t> Clustering::cluster_sizes() const {
    std::vector<std::size_t> out(static_cast<std::size_t>(num_clusters), 0);
    for (int a : assignments) ++out[static_cast<std::size_t>(a)];
    return out;
}

Clustering kmeans_cluster(const SensingMatrix& P, const KMeansOptions& opts) {
    const int N = opts.num_clusters;
    const std::size_t K = P.cols;
    if (N < 1) throw ConfigError("kmeans: need at least one cluster");
    if (static_cast<std::size_t>(N) > K) throw ConfigError("kmeans: more clusters than users");
    if (opts.max_iters < 1) throw ConfigError("kmeans: max_iters must be >= 1");

    const Points pts = transpose_columns(P, opts.normalize_columns);
    const std::size_t D = pts.dim;
    Rng rng(opts.seed);
    std::vector<double> centers = kmeanspp_init(pts, N, rng);
    // Centroid shift is measured in units of the largest coordinate.
    double scale = 0.0;
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t d = 0; d < D; ++d) scale = std::max(scale, std::abs(pts[k][d]));
    if (scale == 0.0) scale = 1.0;

    Clustering out;
    out.num_clusters = N;
    out.seed = opts.seed;
    out.user_ids = P.user_ids;
    out.assignments.assign(K, 0);
    std::vector<double> dist(K);
    std::vector<std::size_t> counts(static_cast<std::size_t>(N));
    std::vector<double> sums(static_cast<std::size_t>(N) * D);

    auto recompute_centers = [&]() {
        std::fill(counts.begin(), counts.end(), 0);
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t k = 0; k < K; ++k) {
            const std::size_t c = static_cast<std::size_t>(out.assignments[k]);
            ++counts[c];
            for (std::size_t d = 0; d < D; ++d) sums[c * D + d] += pts[k][d];
        }
        for (std::size_t c = 0; c < static_cast<std::size_t>(N); ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t d = 0; d < D; ++d) centers[c * D + d] = sums[c * D + d] / static_cast<double>(counts[c]);
        }
    };

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        for (std::size_t k = 0; k < K; ++k) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < N; ++c) {
                const double d = sq_dist(pts[k], centers.data() + static_cast<std::size_t>(c) * D, D);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            out.assignments[k] = best;
            dist[k] = best_d;
        }
        const std::vector<double> previous = centers;
        recompute_centers();

        // Empty clusters take the point farthest from its centroid.
        for (int c = 0; c < N; ++c) {
            if (counts[static_cast<std::size_t>(c)] != 0) continue;
            std::size_t far = K;
            double far_d = -1.0;
            for (std::size_t k = 0; k < K; ++k) {
                if (counts[static_cast<std::size_t>(out.assignments[k])] < 2) continue;
                const double d = sq_dist(pts[k], centers.data() + static_cast<std::size_t>(out.assignments[k]) * D, D);
                if (d > far_d) {
                    far_d = d;
                    far = k;
                }
            }
            if (far == K) break;
            out.assignments[far] = c;
            ++out.repaired_empty;
            recompute_centers();
        }

        double inertia = 0.0;
        for (std::size_t k = 0; k < K; ++k)
            inertia += sq_dist(pts[k], centers.data() + static_cast<std::size_t>(out.assignments[k]) * D, D);
        out.inertia_trace.push_back(inertia);
        out.iterations = iter + 1;

        double shift = 0.0;
        for (std::size_t i = 0; i < centers.size(); ++i) shift = std::max(shift, std::abs(centers[i] - previous[i]));
        if (shift < opts.tol * scale) break;
    }
    return out;
}

std::pair<ChannelDataset, ChannelDataset> split_los_nlos(const ChannelDataset& ds) {
    ChannelDataset los = ds;
    ChannelDataset nlos = ds;
    los.records.clear();
    nlos.records.clear();
    for (const ChannelRecord& r : ds.records) (r.is_los && !r.channel.is_outage() ? los : nlos).records.push_back(r);
    return {std::move(los), std::move(nlos)};
}

json to_json(const Clustering& c) {
    json a = json::array();
    for (std::size_t i = 0; i < c.assignments.size(); ++i)
        a.push_back({{"id", c.user_ids[i]}, {"cluster", c.assignments[i]}});
    return {{"N", c.num_clusters}, {"seed", c.seed}, {"assignments", a}};
}

Clustering clustering_from_json(const json& j) {
    Clustering c;
    try {
        c.num_clusters = j.at("N").get<int>();
        c.seed = j.at("seed").get<std::uint64_t>();
        for (const json& a : j.at("assignments")) {
            const int cl = a.at("cluster").get<int>();
            if (cl < 0 || cl >= c.num_clusters) throw DataError("clustering: cluster index out of range");
            c.user_ids.push_back(a.at("id").get<std::int64_t>());
            c.assignments.push_back(cl);
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("clustering: ") + e.what());
    }
    return c;
}

} // namespace dtcb
