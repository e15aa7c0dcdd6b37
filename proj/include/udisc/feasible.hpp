#pragma once

// The feasible set {p : X - diag(p) >= 0, p >= 0} and its critical surface
// sigma_min(X - diag(p)) = 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "udisc/ensemble.hpp"

namespace udisc {

/// Per-state success probabilities p_i. Bounds are enforced only through the
/// positivity check, never by clamping.
using SuccessPoint = Vector;

struct FeasibilityReport {
    double sigma_min = 0.0;
    double gamma_min = 0.0;
    bool feasible = false;
    bool on_critical_surface = false;
};

namespace detail {

inline void require_size(const GramMatrix& X, const Vector& p, const char* what) {
    if (p.size() != X.size()) {
        throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(X.size()) + " components, got " +
                                std::to_string(p.size()));
    }
}

inline Vector hermitian_eigenvalues(const CMatrix& A) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

/// Determinant of a Hermitian matrix (real by symmetry). Empty matrices give 1.
inline double hermitian_det(const CMatrix& A) {
    if (A.rows() == 0) return 1.0;
    if (A.rows() == 1) return A(0, 0).real();
    return A.partialPivLu().determinant().real();
}

/// A with row and column k removed.
inline CMatrix delete_row_col(const CMatrix& A, Index k) {
    const Index n = A.rows();
    CMatrix out(n - 1, n - 1);
    for (Index i = 0, r = 0; i < n; ++i) {
        if (i == k) continue;
        for (Index j = 0, c = 0; j < n; ++j) {
            if (j == k) continue;
            out(r, c++) = A(i, j);
        }
        ++r;
    }
    return out;
}

}  // namespace detail

/// X - diag(p).
inline CMatrix shifted(const GramMatrix& X, const SuccessPoint& p) {
    detail::require_size(X, p, "success point");
    CMatrix A = X.entries();
    A.diagonal() -= p.cast<cplx>();
    return A;
}

/// Eigenvalues of X - diag(p), ascending.
inline Vector spectrum(const GramMatrix& X, const SuccessPoint& p) {
    return detail::hermitian_eigenvalues(shifted(X, p));
}

/// sigma_n(X - diag(p)).
inline double min_eigenvalue(const GramMatrix& X, const SuccessPoint& p) {
    return spectrum(X, p)(0);
}

inline FeasibilityReport check_feasible(const GramMatrix& X, const SuccessPoint& p) {
    FeasibilityReport r;
    r.sigma_min = min_eigenvalue(X, p);
    r.gamma_min = p.minCoeff();
    r.feasible = r.sigma_min >= -tol::psd && r.gamma_min >= -tol::psd;
    r.on_critical_surface = r.feasible && std::abs(r.sigma_min) <= tol::surface;
    return r;
}

/// M_k(p): determinant of X - diag(p) with row and column k deleted (k is 0-based).
inline double principal_minor(const GramMatrix& X, const SuccessPoint& p, Index k) {
    if (k < 0 || k >= X.size()) {
        throw DimensionMismatch("minor index " + std::to_string(k) + " out of range");
    }
    return detail::hermitian_det(detail::delete_row_col(shifted(X, p), k));
}

/// All n principal minors of order n-1.
inline Vector principal_minors(const GramMatrix& X, const SuccessPoint& p) {
    const CMatrix A = shifted(X, p);
    Vector m(X.size());
    for (Index k = 0; k < X.size(); ++k) m(k) = detail::hermitian_det(detail::delete_row_col(A, k));
    return m;
}

/// det(X - diag(p)) as a product of eigenvalues.
inline double det_xg(const GramMatrix& X, const SuccessPoint& p) {
    return spectrum(X, p).prod();
}

/// Reusable bisection along rays p = t * direction.
///
/// The sign test is an in-place Cholesky factorization: X - t*diag(direction)
/// is positive definite exactly when sigma_n > 0, and sigma_n is non-increasing
/// in t, so bisection converges to the unique crossing. The workspace is kept
/// between calls, which makes bulk sampling allocation-free.
class RayCaster {
public:
    static constexpr int kMaxIterations = 80;

    explicit RayCaster(const GramMatrix& X) : X_(X.entries()), work_(X.size(), X.size()) {}

    /// Returns t * direction with sigma_n(X - t*diag(direction)) = 0.
    /// Components may be zero but none negative, and at least one must be positive.
    SuccessPoint cast(const Vector& direction) {
        if (direction.size() != X_.rows()) {
            throw DimensionMismatch("ray direction has wrong size");
        }
        double inv_min = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < direction.size(); ++i) {
            if (!(direction(i) >= 0.0)) throw PreconditionFailed("ray direction has a negative component");
            if (direction(i) > 0.0) inv_min = std::min(inv_min, 1.0 / direction(i));
        }
        if (!std::isfinite(inv_min)) throw PreconditionFailed("ray direction is zero");

        double lo = 0.0;
        double hi = inv_min + 1.0;
        for (int it = 0; it < kMaxIterations; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (positive_definite(mid, direction)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return lo * direction;
    }

private:
    bool positive_definite(double t, const Vector& d) {
        const Index n = X_.rows();
        work_ = X_;
        for (Index i = 0; i < n; ++i) work_(i, i) -= t * d(i);
        for (Index j = 0; j < n; ++j) {
            double diag = work_(j, j).real();
            for (Index k = 0; k < j; ++k) diag -= std::norm(work_(j, k));
            if (!(diag > 0.0)) return false;
            const double ljj = std::sqrt(diag);
            work_(j, j) = ljj;
            for (Index i = j + 1; i < n; ++i) {
                cplx s = work_(i, j);
                for (Index k = 0; k < j; ++k) s -= work_(i, k) * std::conj(work_(j, k));
                work_(i, j) = s / ljj;
            }
        }
        return true;
    }

    CMatrix X_;
    CMatrix work_;
};

/// Point where the ray through `direction` leaves the feasible set.
inline SuccessPoint ray_to_surface(const GramMatrix& X, const Vector& direction) {
    RayCaster caster(X);
    return caster.cast(direction);
}

}  // namespace udisc
