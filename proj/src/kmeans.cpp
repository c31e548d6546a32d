#include "respca/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace respca {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::vector<std::size_t> assign_nearest(const DenseMatrix& m,
                                        const DenseMatrix& centroids) {
    std::vector<std::size_t> labels(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t k = 0; k < centroids.cols(); ++k) {
            const double d = sq_dist(m.col(j), centroids.col(k));
            if (d < best) {  // ties keep the lowest centroid index
                best = d;
                arg = k;
            }
        }
        labels[j] = arg;
    }
    return labels;
}

// Move the point farthest from its centroid into each empty cluster.
void repair_empty(const DenseMatrix& m, const DenseMatrix& centroids,
                  std::vector<std::size_t>& labels) {
    const std::size_t c = centroids.cols();
    std::vector<std::size_t> counts(c, 0);
    for (std::size_t l : labels) ++counts[l];
    for (std::size_t e = 0; e < c; ++e) {
        if (counts[e] > 0) continue;
        double worst = -1.0;
        std::size_t steal = 0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (counts[labels[j]] <= 1) continue;
            const double d = sq_dist(m.col(j), centroids.col(labels[j]));
            if (d > worst) {
                worst = d;
                steal = j;
            }
        }
        if (worst < 0.0) {
            throw std::runtime_error("kmeans: cannot repair empty cluster");
        }
        --counts[labels[steal]];
        labels[steal] = e;
        ++counts[e];
    }
}

DenseMatrix means_of(const DenseMatrix& m,
                     const std::vector<std::size_t>& labels, std::size_t c) {
    DenseMatrix centroids(m.rows(), c);
    std::vector<std::size_t> counts(c, 0);
    for (std::size_t j = 0; j < m.cols(); ++j) {
        auto dst = centroids.col(labels[j]);
        auto src = m.col(j);
        for (std::size_t i = 0; i < m.rows(); ++i) dst[i] += src[i];
        ++counts[labels[j]];
    }
    for (std::size_t k = 0; k < c; ++k) {
        auto dst = centroids.col(k);
        const double inv = 1.0 / static_cast<double>(counts[k]);
        for (double& v : dst) v *= inv;
    }
    return centroids;
}

double inertia_of(const DenseMatrix& m, const std::vector<std::size_t>& labels,
                  const DenseMatrix& centroids) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        s += sq_dist(m.col(j), centroids.col(labels[j]));
    }
    return s;
}

// Hartigan-style single-point moves after Lloyd has converged; escapes
// local minima Lloyd cannot leave. The move delta uses the exact change of
// the within-cluster sum of squares.
void hartigan_refine(const DenseMatrix& m, std::vector<std::size_t>& labels,
                     DenseMatrix& centroids) {
    const std::size_t c = centroids.cols();
    std::vector<std::size_t> counts(c, 0);
    for (std::size_t l : labels) ++counts[l];
    for (int pass = 0; pass < 50; ++pass) {
        bool improved = false;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const std::size_t from = labels[j];
            if (counts[from] <= 1) continue;
            const double na = static_cast<double>(counts[from]);
            const double gain =
                na / (na - 1.0) * sq_dist(m.col(j), centroids.col(from));
            double best_delta = -1e-12;
            std::size_t to = from;
            for (std::size_t k = 0; k < c; ++k) {
                if (k == from) continue;
                const double nb = static_cast<double>(counts[k]);
                const double cost =
                    nb / (nb + 1.0) * sq_dist(m.col(j), centroids.col(k));
                if (cost - gain < best_delta) {
                    best_delta = cost - gain;
                    to = k;
                }
            }
            if (to == from) continue;
            // incremental centroid update for both clusters
            auto cf = centroids.col(from);
            auto ct = centroids.col(to);
            auto x = m.col(j);
            const double na1 = static_cast<double>(counts[from] - 1);
            const double nb1 = static_cast<double>(counts[to] + 1);
            for (std::size_t i = 0; i < m.rows(); ++i) {
                cf[i] = (cf[i] * static_cast<double>(counts[from]) - x[i]) / na1;
                ct[i] = (ct[i] * static_cast<double>(counts[to]) + x[i]) / nb1;
            }
            --counts[from];
            ++counts[to];
            labels[j] = to;
            improved = true;
        }
        if (!improved) break;
    }
}

KMeansResult lloyd_run(const DenseMatrix& m, DenseMatrix centroids,
                       const KMeansConfig& cfg) {
    std::vector<std::size_t> labels;
    std::size_t it = 0;
    for (; it < cfg.max_iters; ++it) {
        auto [assignment, next] = lloyd_step(m, centroids);
        labels = assignment.labels();
        double moved = 0.0, scale = 0.0;
        for (std::size_t k = 0; k < centroids.size(); ++k) {
            const double d = next.data()[k] - centroids.data()[k];
            moved += d * d;
            scale += centroids.data()[k] * centroids.data()[k];
        }
        centroids = std::move(next);
        if (std::sqrt(moved) <= cfg.tol * std::max(std::sqrt(scale), 1e-300)) {
            ++it;
            break;
        }
    }
    hartigan_refine(m, labels, centroids);
    centroids = means_of(m, labels, cfg.c);  // drop incremental rounding
    KMeansResult res;
    res.inertia = inertia_of(m, labels, centroids);
    res.assignment = GroupAssignment(std::move(labels), cfg.c);
    res.centroids = std::move(centroids);
    res.iters_run = it;
    return res;
}

}  // namespace

DenseMatrix kmeans_pp_init(const DenseMatrix& m, std::size_t c,
                           std::mt19937_64& rng) {
    const std::size_t n = m.cols();
    if (c == 0) throw std::invalid_argument("kmeans_pp_init: c must be >= 1");
    if (c > n) throw std::invalid_argument("kmeans_pp_init: c exceeds column count");

    std::vector<std::size_t> chosen;
    std::vector<bool> is_chosen(n, false);
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    chosen.push_back(first(rng));
    is_chosen[chosen[0]] = true;

    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    while (chosen.size() < c) {
        const std::size_t last = chosen.back();
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            d2[j] = std::min(d2[j], sq_dist(m.col(j), m.col(last)));
            total += d2[j];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double r = u(rng);
            for (std::size_t j = 0; j < n; ++j) {
                r -= d2[j];
                if (r <= 0.0 && !is_chosen[j]) {
                    pick = j;
                    break;
                }
            }
        }
        if (pick == n) {
            // all remaining mass on duplicates; take any unchosen column
            for (std::size_t j = 0; j < n; ++j) {
                if (!is_chosen[j]) {
                    pick = j;
                    break;
                }
            }
        }
        chosen.push_back(pick);
        is_chosen[pick] = true;
    }

    DenseMatrix centroids(m.rows(), c);
    for (std::size_t k = 0; k < c; ++k) {
        auto dst = centroids.col(k);
        auto src = m.col(chosen[k]);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return centroids;
}

std::pair<GroupAssignment, DenseMatrix> lloyd_step(
    const DenseMatrix& m, const DenseMatrix& centroids) {
    if (centroids.cols() == 0 || centroids.rows() != m.rows()) {
        throw std::invalid_argument("lloyd_step: bad centroid matrix");
    }
    auto labels = assign_nearest(m, centroids);
    repair_empty(m, centroids, labels);
    auto next = means_of(m, labels, centroids.cols());
    return {GroupAssignment(std::move(labels), centroids.cols()), std::move(next)};
}

KMeansResult kmeans(const DenseMatrix& m, const KMeansConfig& cfg) {
    if (cfg.c == 0) throw std::invalid_argument("kmeans: c must be >= 1");
    if (cfg.c > m.cols()) throw std::invalid_argument("kmeans: c exceeds column count");

    std::mt19937_64 rng(cfg.seed);
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < cfg.n_restarts; ++r) {
        auto centroids = kmeans_pp_init(m, cfg.c, rng);
        auto res = lloyd_run(m, std::move(centroids), cfg);
        if (res.inertia < best.inertia) best = std::move(res);
    }
    return best;
}

KMeansResult kmeans_warm(const DenseMatrix& m, const KMeansConfig& cfg,
                         const GroupAssignment& init) {
    if (init.size() != m.cols() || init.groups() != cfg.c) {
        throw std::invalid_argument("kmeans_warm: assignment does not match");
    }
    return lloyd_run(m, means_of(m, init.labels(), cfg.c), cfg);
}

}  // namespace respca
