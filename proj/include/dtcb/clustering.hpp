// SPDX-License-Identifier: Apache-2.0
//
// Sensing-beam signatures and K-means partitioning of users.
#pragma once

#include "dtcb/dataset.hpp"
#include "dtcb/io.hpp"
#include "dtcb/mimo.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace dtcb {

struct SensingSet {
    std::vector<Beam> beams;
    std::uint64_t seed = 0;
};

// Each phase drawn i.i.d. uniformly from the phase set.
SensingSet gen_sensing_beams(const ArrayConfig& cfg, const PhaseSet& ps, int num_beams, std::uint64_t seed);

// S x K matrix, row-major: value(s, k) = |f_s^H h_k|^2.
struct SensingMatrix {
    std::size_t rows = 0;  // S
    std::size_t cols = 0;  // K
    std::vector<double> values;
    std::vector<std::int64_t> user_ids;

    double operator()(std::size_t s, std::size_t k) const { return values[s * cols + k]; }
    std::vector<double> column(std::size_t k) const;
};

SensingMatrix build_sensing_matrix(const SensingSet& sensing, const ChannelDataset& ds);

struct KMeansOptions {
    int num_clusters = 8;
    std::uint64_t seed = 0;
    int max_iters = 100;
    double tol = 1e-9;  // on the max centroid shift, relative to the largest coordinate
    bool normalize_columns = false;  // L2-normalize each column before clustering
};

struct Clustering {
    int num_clusters = 0;
    std::uint64_t seed = 0;
    std::vector<std::int64_t> user_ids;
    std::vector<int> assignments;       // parallel to user_ids
    std::vector<double> inertia_trace;  // within-cluster sum of squares after each Lloyd step
    int iterations = 0;
    int repaired_empty = 0;

    std::vector<std::size_t> members(int cluster) const;
    std::vector<std::size_t> cluster_sizes() const;
};

// Lloyd's algorithm with k-means++ seeding on the columns of P. Empty
// clusters take the point farthest from its centroid. Throws ConfigError
// when N > K or N < 1.
Clustering kmeans_cluster(const SensingMatrix& P, const KMeansOptions& opts);

// Records split by their LoS flag; outage records land in the NLoS set.
std::pair<ChannelDataset, ChannelDataset> split_los_nlos(const ChannelDataset& ds);

json to_json(const Clustering& c);
Clustering clustering_from_json(const json& j);

} // namespace dtcb
