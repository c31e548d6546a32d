#include "respca/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace respca {

namespace {

constexpr double kRhoCap = 1e12;

double rel_diff(const DenseMatrix& a, const DenseMatrix& b, double x_norm) {
    double sq = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a.data()[k] - b.data()[k];
        sq += d * d;
    }
    return std::sqrt(sq) / x_norm;
}

double feas_residual(const DenseMatrix& x, const DenseMatrix& l,
                     const DenseMatrix& s, double x_norm) {
    double sq = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x.data()[k] - l.data()[k] - s.data()[k];
        sq += d * d;
    }
    return std::sqrt(sq) / x_norm;
}

}  // namespace

double SolverConfig::resolve_lambda(std::size_t rows, std::size_t cols) const {
    if (lambda) return *lambda;
    return std::sqrt(static_cast<double>(std::max(rows, cols)));
}

void SolverConfig::validate() const {
    if (lambda && *lambda <= 0.0) throw std::invalid_argument("lambda must be > 0");
    if (rho0 <= 0.0) throw std::invalid_argument("rho0 must be > 0");
    if (kappa <= 1.0) throw std::invalid_argument("kappa must be > 1");
    if (tol <= 0.0) throw std::invalid_argument("tol must be > 0");
    if (c == 0) throw std::invalid_argument("c must be >= 1");
    if (max_iter == 0) throw std::invalid_argument("max_iter must be >= 1");
}

double Residuals::max() const { return std::max({feas, delta_l, delta_s}); }

DenseMatrix l_update(const DenseMatrix& d, const GroupAssignment& g,
                     double lambda, double rho) {
    if (rho <= 0.0) throw std::invalid_argument("l_update: rho must be > 0");
    if (lambda < 0.0) throw std::invalid_argument("l_update: lambda must be >= 0");
    if (g.size() != d.cols()) {
        throw std::invalid_argument("l_update: assignment length != column count");
    }
    const double own_w = rho / (2.0 * lambda + rho);
    DenseMatrix l(d.rows(), d.cols());
    for (const auto& members : g.group_indices()) {
        std::vector<double> sum(d.rows(), 0.0);
        for (std::size_t j : members) {
            auto c = d.col(j);
            for (std::size_t i = 0; i < d.rows(); ++i) sum[i] += c[i];
        }
        const double mean_w = 2.0 * lambda /
            (static_cast<double>(members.size()) * (2.0 * lambda + rho));
        for (std::size_t j : members) {
            auto src = d.col(j);
            auto dst = l.col(j);
            for (std::size_t i = 0; i < d.rows(); ++i) {
                dst[i] = own_w * src[i] + mean_w * sum[i];
            }
        }
    }
    return l;
}

DenseMatrix s_update_l1(const DenseMatrix& b, double threshold) {
    if (threshold < 0.0) throw std::invalid_argument("s_update_l1: negative threshold");
    DenseMatrix s(b.rows(), b.cols());
    for (std::size_t k = 0; k < b.size(); ++k) {
        const double v = b.data()[k];
        const double mag = std::abs(v) - threshold;
        s.data()[k] = mag > 0.0 ? std::copysign(mag, v) : 0.0;
    }
    return s;
}

DenseMatrix s_update_l21(const DenseMatrix& b, double threshold) {
    if (threshold < 0.0) throw std::invalid_argument("s_update_l21: negative threshold");
    DenseMatrix s(b.rows(), b.cols());
    const auto norms = column_l2_norms(b);
    for (std::size_t j = 0; j < b.cols(); ++j) {
        if (norms[j] <= threshold) continue;  // zero column stays zero
        const double scale = 1.0 - threshold / norms[j];
        auto src = b.col(j);
        auto dst = s.col(j);
        for (std::size_t i = 0; i < b.rows(); ++i) dst[i] = scale * src[i];
    }
    return s;
}

void multiplier_update(SolverState& state, const DenseMatrix& x, double kappa) {
    if (kappa <= 1.0) throw std::invalid_argument("multiplier_update: kappa must be > 1");
    for (std::size_t k = 0; k < x.size(); ++k) {
        state.Theta.data()[k] +=
            state.rho * (x.data()[k] - state.L.data()[k] - state.S.data()[k]);
    }
    state.rho = std::min(state.rho * kappa, kRhoCap);
}

std::pair<bool, Residuals> check_convergence(const DenseMatrix& x,
                                             const DenseMatrix& l_prev,
                                             const DenseMatrix& l,
                                             const DenseMatrix& s_prev,
                                             const DenseMatrix& s, double tol) {
    const double x_norm = frob_norm(x);
    if (x_norm == 0.0) throw std::invalid_argument("check_convergence: all-zero X");
    Residuals r;
    r.feas = feas_residual(x, l, s, x_norm);
    r.delta_l = rel_diff(l, l_prev, x_norm);
    r.delta_s = rel_diff(s, s_prev, x_norm);
    return {r.max() <= tol, r};
}

DecompositionResult solve(const DenseMatrix& x, const SolverConfig& cfg) {
    cfg.validate();
    if (cfg.c > x.cols()) throw std::invalid_argument("solve: c exceeds column count");
    if (!x.all_finite()) throw std::invalid_argument("solve: non-finite X");
    const double x_norm = frob_norm(x);
    if (x_norm == 0.0) throw std::invalid_argument("solve: all-zero X");

    const auto t0 = std::chrono::steady_clock::now();
    const double lambda = cfg.resolve_lambda(x.rows(), x.cols());

    SolverState state;
    state.L = x;
    state.S = DenseMatrix(x.rows(), x.cols());
    state.Theta = DenseMatrix(x.rows(), x.cols());
    state.rho = cfg.rho0;

    // initial grouping from k-means on X; restarts matter here since the
    // alternation warm-starts from this assignment ever after
    KMeansConfig km = cfg.kmeans;
    km.c = cfg.c;
    km.n_restarts = std::max<std::size_t>(km.n_restarts, 5);
    state.assignment = kmeans(x, km).assignment;
    KMeansConfig km_warm = km;
    km_warm.n_restarts = 1;

    const std::size_t budget = cfg.fixed_iters.value_or(cfg.max_iter);
    DecompositionResult out;
    out.lambda = lambda;
    DenseMatrix d(x.rows(), x.cols());

    for (std::size_t t = 0; t < budget; ++t) {
        const DenseMatrix l_prev = state.L;
        const DenseMatrix s_prev = state.S;

        // D = X - S + Theta/rho
        for (std::size_t k = 0; k < x.size(); ++k) {
            d.data()[k] = x.data()[k] - state.S.data()[k] +
                          state.Theta.data()[k] / state.rho;
        }
        state.L = l_update(d, state.assignment, lambda, state.rho);

        state.assignment = kmeans_warm(state.L, km_warm, state.assignment).assignment;

        // B = X - L + Theta/rho
        for (std::size_t k = 0; k < x.size(); ++k) {
            d.data()[k] = x.data()[k] - state.L.data()[k] +
                          state.Theta.data()[k] / state.rho;
        }
        const double threshold = 1.0 / state.rho;
        state.S = cfg.sparse_norm == SparseNorm::L1
                      ? s_update_l1(d, threshold)
                      : s_update_l21(d, threshold);

        multiplier_update(state, x, cfg.kappa);
        state.iter = t + 1;

        Residuals r;
        r.feas = feas_residual(x, state.L, state.S, x_norm);
        r.delta_l = rel_diff(state.L, l_prev, x_norm);
        r.delta_s = rel_diff(state.S, s_prev, x_norm);
        out.report.feas.push_back(r.feas);
        out.report.delta_l.push_back(r.delta_l);
        out.report.delta_s.push_back(r.delta_s);

        const double sparse_term = cfg.sparse_norm == SparseNorm::L1
                                       ? elementwise_l1(state.S)
                                       : l21_norm(state.S);
        out.report.objective.push_back(
            lambda * group_scatter(state.L, state.assignment) + sparse_term);

        if (!cfg.fixed_iters && r.max() <= cfg.tol) {
            out.report.converged = true;
            break;
        }
    }

    out.report.iters = state.iter;
    out.L = std::move(state.L);
    out.S = std::move(state.S);
    out.assignment = std::move(state.assignment);
    out.wall_time = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace respca
