#pragma once

#include <optional>
#include <vector>

#include "respca/kmeans.hpp"
#include "respca/matrix.hpp"

namespace respca {

enum class SparseNorm { L1, L21 };

struct SolverConfig {
    /// Balancing parameter; unset means sqrt(max(n, d)).
    std::optional<double> lambda;
    double rho0 = 1e-4;
    double kappa = 1.5;
    double tol = 1e-3;
    std::size_t max_iter = 500;
    std::size_t c = 1;
    SparseNorm sparse_norm = SparseNorm::L1;
    KMeansConfig kmeans;
    /// When set, runs exactly this many iterations ignoring tol/max_iter.
    std::optional<std::size_t> fixed_iters;

    double resolve_lambda(std::size_t rows, std::size_t cols) const;
    void validate() const;
};

struct SolverState {
    DenseMatrix L;
    DenseMatrix S;
    DenseMatrix Theta;
    double rho = 0.0;
    GroupAssignment assignment;
    std::size_t iter = 0;
};

struct ConvergenceReport {
    std::vector<double> feas;       // ||X-L-S||_F / ||X||_F per iteration
    std::vector<double> delta_l;    // ||L_{t+1}-L_t||_F / ||X||_F
    std::vector<double> delta_s;    // ||S_{t+1}-S_t||_F / ||X||_F
    std::vector<double> objective;  // lambda*scatter + sparse norm of S
    bool converged = false;
    std::size_t iters = 0;
};

struct DecompositionResult {
    DenseMatrix L;
    DenseMatrix S;
    GroupAssignment assignment;
    ConvergenceReport report;
    double wall_time = 0.0;  // seconds
    double lambda = 0.0;     // resolved value
};

struct Residuals {
    double feas = 0.0;
    double delta_l = 0.0;
    double delta_s = 0.0;
    double max() const;
};

/// Closed-form L-subproblem: per group, blend each column of D with the
/// group mean, weights rho/(2*lambda+rho) and 2*lambda/(2*lambda+rho).
/// One group-sum vector per group; O(d*n), no n x n matrix formed.
DenseMatrix l_update(const DenseMatrix& d, const GroupAssignment& g,
                     double lambda, double rho);

/// Elementwise soft-thresholding, prox of threshold*||.||_1.
DenseMatrix s_update_l1(const DenseMatrix& b, double threshold);

/// Column-wise shrinkage, prox of threshold*||.||_{2,1}.
DenseMatrix s_update_l21(const DenseMatrix& b, double threshold);

/// Theta += rho*(X - L - S); rho *= kappa.
void multiplier_update(SolverState& state, const DenseMatrix& x, double kappa);

/// Relative residual triple against tol; errors on all-zero X.
std::pair<bool, Residuals> check_convergence(const DenseMatrix& x,
                                             const DenseMatrix& l_prev,
                                             const DenseMatrix& l,
                                             const DenseMatrix& s_prev,
                                             const DenseMatrix& s, double tol);

/// Full RES-PCA ALM loop: L-update, k-means p-update, S-update, multiplier
/// update, until the triple-residual stopping rule or the iteration budget.
DecompositionResult solve(const DenseMatrix& x, const SolverConfig& cfg);

}  // namespace respca
