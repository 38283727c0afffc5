#ifndef BOGOFLOW_FOCK_HPP
#define BOGOFLOW_FOCK_HPP

#include <functional>
#include <unordered_map>
#include <vector>

#include <Eigen/Sparse>

#include "bogoflow/grid.hpp"
#include "bogoflow/hartree.hpp"

namespace bogoflow {

using SpMat = Eigen::SparseMatrix<cxd>;

/// Occupation-number basis of M modes truncated by total occupation.
struct FockBasis {
    int modes = 0;
    int n_max = 0;
    std::vector<std::vector<int>> states; // graded lexicographic
    std::unordered_map<std::uint64_t, std::size_t> index;

    std::size_t dimension() const { return states.size(); }
    std::uint64_t key(const std::vector<int>& occ) const;
    /// -1 when the tuple leaves the cutoff
    std::ptrdiff_t find(const std::vector<int>& occ) const;
};

FockBasis enumerate_basis(int modes, int n_max);

struct FockState {
    FockBasis basis;
    Vec amplitudes;
};

FockState vacuum_state(const FockBasis& basis);

/// h self-adjoint (one-body), k symmetric (pairing), both M x M.
struct QuadraticGenerator {
    Mat h;
    Mat k;
};

QuadraticGenerator validate_generator(const QuadraticGenerator& gen);

/// dGamma(h) + 1/2 sum_ij (k_ij a*_i a*_j + conj(k_ij) a_i a_j) restricted to the basis.
SpMat build_generator_matrix(const QuadraticGenerator& gen, const FockBasis& basis);

struct LeakageReport {
    double leakage = 0;         // 1 - |amplitudes|^2 at T
    double drift_per_unit_time = 0;
    bool accepted = true;
};

/// RK4 propagation of i d/dt psi = H(t) psi on the truncated space.
std::pair<FockState, LeakageReport> evolve_fock(const FockState& initial,
                                                const std::function<QuadraticGenerator(double)>& gen_of_t,
                                                double T, double dt);

/// a_i applied to the state (stays inside the cutoff).
Vec annihilate(const FockState& state, int mode);

struct TwoPointFunctions {
    Mat G; // G(i,j) = <a*_j a_i>
    Mat P; // P(i,j) = <a_i a_j>
};
TwoPointFunctions two_point_functions(const FockState& state);

/// <(N+1)^k> for k = 1..kmax.
std::vector<double> number_moments(const FockState& state, int kmax);

struct WickCheck {
    double lhs = 0, rhs = 0, residual = 0;
};

/// Quartic quasi-free identity: sum_ij w_ij <a*_j a*_i a_j a_i> against the
/// (gamma, sigma) blocks of the matching mode flow.
WickCheck check_wick_quartic(const FockState& state, const Eigen::MatrixXd& weights,
                             const Mat& gamma_block, const Mat& sigma_block);

struct ModeFlowResult {
    Mat gamma, sigma;
};

/// RK4 on the 2M x 2M symplectic system with the same (h, k); gamma(0)=I, sigma(0)=0.
ModeFlowResult mode_symplectic_flow(const std::function<QuadraticGenerator(double)>& gen_of_t,
                                    double T, double dt);

/// Two-point predictions of the evolved vacuum: G = (sigma sigma^H)^T, P = gamma sigma^H.
TwoPointFunctions quasi_free_predictions(const ModeFlowResult& flow);

/// Galerkin truncation of (H_t, K2t) onto the M lowest-|k| Fourier modes of a d=1 grid.
QuadraticGenerator galerkin_generator(const Field& phi, const Potential& v, int modes);

} // namespace bogoflow

#endif
