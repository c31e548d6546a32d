#pragma once

#include <cstdint>
#include <random>
#include <utility>

#include "respca/matrix.hpp"

namespace respca {

struct KMeansConfig {
    std::size_t c = 1;
    std::size_t max_iters = 100;
    std::size_t n_restarts = 1;
    std::uint64_t seed = 0;
    double tol = 1e-6;  // relative centroid movement
};

struct KMeansResult {
    GroupAssignment assignment;
    DenseMatrix centroids;  // d x c
    double inertia = 0.0;   // within-cluster sum of squares
    std::size_t iters_run = 0;
};

/// k-means++ seeding: c distinct columns of m chosen by distance-weighted
/// sampling. Deterministic given the generator state.
DenseMatrix kmeans_pp_init(const DenseMatrix& m, std::size_t c,
                           std::mt19937_64& rng);

/// One Lloyd iteration: nearest-centroid assignment (ties to the lowest
/// centroid index, empty clusters repaired by stealing the farthest point),
/// then centroid recomputation.
std::pair<GroupAssignment, DenseMatrix> lloyd_step(const DenseMatrix& m,
                                                   const DenseMatrix& centroids);

/// Full k-means over the columns of m, best of cfg.n_restarts by inertia.
KMeansResult kmeans(const DenseMatrix& m, const KMeansConfig& cfg);

/// k-means warm-started from an existing assignment (single run, no
/// reseeding). Used for the per-iteration p-subproblem inside the solver.
KMeansResult kmeans_warm(const DenseMatrix& m, const KMeansConfig& cfg,
                         const GroupAssignment& init);

}  // namespace respca
