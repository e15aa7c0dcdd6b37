#pragma once

// Input ensembles, Gram matrices and reciprocal (dual) states.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "udisc/errors.hpp"

namespace udisc {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

namespace tol {
inline constexpr double norm = 1e-6;     // input normalization and prior sums
inline constexpr double rank = 1e-10;    // det(X) floor for linear independence
inline constexpr double solve = 1e-10;   // biorthogonality / completeness residuals
inline constexpr double psd = 1e-9;      // accepted negative eigenvalue slack
inline constexpr double surface = 1e-9;  // |sigma_min| on the critical surface
}  // namespace tol

/// Hermitian Gram matrix X = Phi^dagger Phi with its eigen-decomposition.
///
/// Eigenvalues are stored in descending order, so `eigenvalues()(n-1)` is the
/// smallest one. Every instance is positive definite with unit diagonal.
class GramMatrix {
public:
    /// Validates and wraps an explicit matrix. Throws DimensionMismatch,
    /// NotNormalized or LinearlyDependent.
    static GramMatrix from_matrix(const CMatrix& X) {
        if (X.rows() != X.cols() || X.rows() < 1) {
            throw DimensionMismatch("Gram matrix must be square and non-empty");
        }
        const Index n = X.rows();
        CMatrix H = 0.5 * (X + X.adjoint());
        if ((H - X).cwiseAbs().maxCoeff() > tol::norm) {
            throw DimensionMismatch("Gram matrix is not Hermitian");
        }
        for (Index i = 0; i < n; ++i) {
            if (std::abs(H(i, i) - 1.0) > tol::norm) {
                throw NotNormalized("Gram matrix diagonal entry " + std::to_string(i) + " is not 1");
            }
            H(i, i) = 1.0;
        }
        return GramMatrix(std::move(H));
    }

    Index size() const noexcept { return entries_.rows(); }
    const CMatrix& entries() const noexcept { return entries_; }
    cplx operator()(Index i, Index j) const { return entries_(i, j); }

    const Vector& eigenvalues() const noexcept { return eigenvalues_; }
    /// Columns are unit eigenvectors matching `eigenvalues()`.
    const CMatrix& eigenvectors() const noexcept { return eigenvectors_; }

    double sigma_min() const { return eigenvalues_(size() - 1); }
    double sigma_max() const { return eigenvalues_(0); }
    double determinant() const { return eigenvalues_.prod(); }
    double condition_number() const { return sigma_max() / sigma_min(); }

    /// X^{-1} assembled from the eigen-decomposition.
    CMatrix inverse() const {
        const Vector inv = eigenvalues_.cwiseInverse();
        return eigenvectors_ * inv.asDiagonal() * eigenvectors_.adjoint();
    }

private:
    explicit GramMatrix(CMatrix X) : entries_(std::move(X)) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(entries_);
        const Index n = entries_.rows();
        eigenvalues_ = es.eigenvalues().reverse();
        eigenvectors_ = es.eigenvectors().rowwise().reverse();
        if (eigenvalues_(n - 1) <= 0.0 || eigenvalues_.prod() <= tol::rank) {
            throw LinearlyDependent("states are linearly dependent (det X = " +
                                    std::to_string(eigenvalues_.prod()) + ")");
        }
    }

    CMatrix entries_;
    Vector eigenvalues_;
    CMatrix eigenvectors_;
};

/// n pure states of dimension d >= n together with their prior probabilities.
class StateEnsemble {
public:
    /// Validating constructor. States within tol::norm of unit norm are
    /// re-normalized; anything further off is rejected.
    StateEnsemble(const std::vector<CVector>& states, const Vector& priors) {
        if (states.size() < 2) {
            throw DimensionMismatch("at least two states are required");
        }
        const Index n = static_cast<Index>(states.size());
        const Index d = states.front().size();
        for (Index i = 0; i < n; ++i) {
            if (states[i].size() != d) {
                throw DimensionMismatch("state " + std::to_string(i) + " has dimension " +
                                        std::to_string(states[i].size()) + ", expected " +
                                        std::to_string(d));
            }
        }
        if (d < n) {
            throw DimensionMismatch("dimension " + std::to_string(d) + " is smaller than the number of states " +
                                    std::to_string(n));
        }
        phi_.resize(d, n);
        for (Index i = 0; i < n; ++i) {
            const double nrm = states[i].norm();
            if (std::abs(nrm - 1.0) > tol::norm) {
                throw NotNormalized("state " + std::to_string(i) + " has norm " + std::to_string(nrm));
            }
            phi_.col(i) = states[i] / nrm;
        }
        set_priors(priors);
        gram_check();
    }

    /// Columns of `phi` are the states.
    StateEnsemble(const CMatrix& phi, const Vector& priors)
        : StateEnsemble(columns(phi), priors) {}

    Index size() const noexcept { return phi_.cols(); }
    Index dim() const noexcept { return phi_.rows(); }
    const CMatrix& states() const noexcept { return phi_; }
    CVector state(Index i) const { return phi_.col(i); }
    const Vector& priors() const noexcept { return priors_; }

    /// Same states, different priors (validated).
    StateEnsemble with_priors(const Vector& priors) const {
        StateEnsemble copy = *this;
        copy.set_priors(priors);
        return copy;
    }

private:
    static std::vector<CVector> columns(const CMatrix& phi) {
        std::vector<CVector> out;
        out.reserve(static_cast<std::size_t>(phi.cols()));
        for (Index i = 0; i < phi.cols(); ++i) out.emplace_back(phi.col(i));
        return out;
    }

    void set_priors(const Vector& priors) {
        if (priors.size() != phi_.cols()) {
            throw DimensionMismatch("priors: expected " + std::to_string(phi_.cols()) + " entries, got " +
                                    std::to_string(priors.size()));
        }
        for (Index i = 0; i < priors.size(); ++i) {
            if (!std::isfinite(priors(i)) || priors(i) < -tol::norm) {
                throw PriorsInvalid("priors: entry " + std::to_string(i) + " is negative or not finite");
            }
        }
        const double sum = priors.sum();
        if (std::abs(sum - 1.0) > tol::norm) {
            throw PriorsInvalid("priors: sum is " + std::to_string(sum) + ", expected 1");
        }
        priors_ = priors.cwiseMax(0.0);
        priors_ /= priors_.sum();
    }

    void gram_check() const {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(phi_.adjoint() * phi_, Eigen::EigenvaluesOnly);
        const double det = es.eigenvalues().prod();
        if (es.eigenvalues()(0) <= 0.0 || det <= tol::rank) {
            throw LinearlyDependent("states are linearly dependent (det X = " + std::to_string(det) + ")");
        }
    }

    CMatrix phi_;
    Vector priors_;
};

/// Free-function form of the validating constructor.
inline StateEnsemble validate(const std::vector<CVector>& raw_states, const Vector& raw_priors) {
    return StateEnsemble(raw_states, raw_priors);
}

/// X_ij = <psi_i|psi_j>.
inline GramMatrix gram(const StateEnsemble& ensemble) {
    CMatrix X = ensemble.states().adjoint() * ensemble.states();
    X = 0.5 * (X + X.adjoint()).eval();
    for (Index i = 0; i < X.rows(); ++i) X(i, i) = 1.0;
    return GramMatrix::from_matrix(X);
}

/// Reciprocal states, one per column: <psi_j|dual_i> = delta_ij.
struct DualStates {
    CMatrix columns;

    /// max_{i,j} |<psi_j|dual_i> - delta_ij|.
    double biorthogonality_residual(const StateEnsemble& ensemble) const {
        const CMatrix overlap = ensemble.states().adjoint() * columns;
        return (overlap - CMatrix::Identity(overlap.rows(), overlap.cols())).cwiseAbs().maxCoeff();
    }
};

/// Phi~ = Phi (Phi^dagger Phi)^{-1}.
inline DualStates dual_states(const StateEnsemble& ensemble) {
    return DualStates{ensemble.states() * gram(ensemble).inverse()};
}

}  // namespace udisc
