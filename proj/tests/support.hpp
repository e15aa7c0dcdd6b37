#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "udisc/ensemble.hpp"
#include "udisc/feasible.hpp"

namespace udisc::testing {

/// Three real states used throughout the numerical examples.
inline CMatrix table_states() {
    CMatrix phi = CMatrix::Zero(3, 3);
    const double a = 1.0 / std::sqrt(5.0), b = 1.0 / std::sqrt(17.0);
    phi(0, 0) = 1.0;
    phi(0, 1) = a;
    phi(1, 1) = 2.0 * a;
    phi(0, 2) = 2.0 * b;
    phi(1, 2) = 2.0 * b;
    phi(2, 2) = 3.0 * b;
    return phi;
}

inline Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Index>(xs.size()));
    Index k = 0;
    for (double x : xs) v(k++) = x;
    return v;
}

inline StateEnsemble table_ensemble(std::initializer_list<double> priors) {
    return StateEnsemble(table_states(), vec(priors));
}

inline GramMatrix table_gram() { return gram(table_ensemble({1.0 / 3, 1.0 / 3, 1.0 / 3})); }

/// Two real unit vectors with overlap s.
inline CMatrix pair_states(double s) {
    CMatrix phi = CMatrix::Zero(2, 2);
    phi(0, 0) = 1.0;
    phi(0, 1) = s;
    phi(1, 1) = std::sqrt(1.0 - s * s);
    return phi;
}

/// States whose Gram matrix is X: columns of the upper Cholesky factor.
inline CMatrix states_from_gram(const CMatrix& X) {
    Eigen::LLT<CMatrix> llt(X);
    return llt.matrixU();
}

inline Vector random_priors(std::mt19937_64& rng, Index n, double floor = 0.02) {
    std::gamma_distribution<double> g(1.0, 1.0);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = g(rng) + floor;
    return v / v.sum();
}

/// n random complex unit vectors in dimension d (Gaussian), redrawn until
/// the Gram matrix has sigma_min above `min_sigma`.
inline CMatrix random_states(std::mt19937_64& rng, Index n, Index d, bool complex = true, double min_sigma = 0.05) {
    std::normal_distribution<double> N(0.0, 1.0);
    for (;;) {
        CMatrix phi(d, n);
        for (Index c = 0; c < n; ++c) {
            for (Index r = 0; r < d; ++r) phi(r, c) = cplx(N(rng), complex ? N(rng) : 0.0);
            phi.col(c).normalize();
        }
        const CMatrix X = phi.adjoint() * phi;
        if (detail::hermitian_eigenvalues(X)(0) > min_sigma) return phi;
    }
}

inline StateEnsemble random_ensemble(std::mt19937_64& rng, Index n, Index d, bool complex = true) {
    return StateEnsemble(random_states(rng, n, d, complex), random_priors(rng, n));
}

/// Hub-structured Gram: X_{0k} = c_k e^{i phi_k}, X_{jk} = 0 for j, k >= 1.
inline CMatrix star_gram(const std::vector<cplx>& spokes) {
    const Index n = static_cast<Index>(spokes.size()) + 1;
    CMatrix X = CMatrix::Identity(n, n);
    for (Index k = 1; k < n; ++k) {
        X(0, k) = spokes[static_cast<std::size_t>(k - 1)];
        X(k, 0) = std::conj(X(0, k));
    }
    return X;
}

inline bool near(const Vector& a, const Vector& b, double tol) {
    return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace udisc::testing
