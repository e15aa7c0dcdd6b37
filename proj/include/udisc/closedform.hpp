#pragma once

// Analytical results: phase representation of interior optima, the star
// (hub) configuration, generalized equal-probability measurements and the
// three-state formulas.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "udisc/ensemble.hpp"
#include "udisc/feasible.hpp"
#include "udisc/solver.hpp"

namespace udisc {

// ---------------------------------------------------------------------------
// Phase representation
// ---------------------------------------------------------------------------

/// Relative phases theta_k (theta_0 = 0) and scale xi = sqrt(lambda).
struct PhaseVector {
    Vector thetas;
    double xi = 0.0;
};

inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    if (a > std::numbers::pi) a -= two_pi;
    return a;
}

/// Phases from the null vector u of X - diag(p_opt). At an interior
/// non-singular optimum the adjugate is lambda * u u^dagger, so |u_k|^2 must
/// equal gamma_k; theta_k = arg u_k - arg u_0.
inline PhaseVector extract_phases(const GramMatrix& X, const Vector& gamma, const SuccessPoint& p_opt) {
    detail::require_size(X, gamma, "priors");
    const Index n = X.size();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(shifted(X, p_opt));
    const Vector& ev = es.eigenvalues();
    if (std::abs(ev(0)) > 1e-8 || ev(1) <= 1e-8) {
        throw NotInteriorOptimum("X - diag(p) does not have rank n-1 (eigenvalues " + std::to_string(ev(0)) + ", " +
                                 std::to_string(ev(1)) + ")");
    }
    const CVector u = es.eigenvectors().col(0);
    for (Index k = 0; k < n; ++k) {
        if (std::abs(std::norm(u(k)) - gamma(k)) > 1e-6) {
            throw NotInteriorOptimum("null vector modulus |u_" + std::to_string(k) + "|^2 = " +
                                     std::to_string(std::norm(u(k))) + " differs from the prior " +
                                     std::to_string(gamma(k)));
        }
    }
    const double lambda = principal_minors(X, p_opt).sum() / gamma.sum();
    if (!(lambda > 0.0)) throw NotInteriorOptimum("multiplier is not positive");

    PhaseVector out;
    out.thetas.resize(n);
    const double ref = std::arg(u(0));
    for (Index k = 0; k < n; ++k) out.thetas(k) = wrap_angle(std::arg(u(k)) - ref);
    out.thetas(0) = 0.0;
    out.xi = std::sqrt(lambda);
    return out;
}

struct PhaseReconstruction {
    SuccessPoint p;
    double p_bar = 0.0;
    /// d/dtheta_i of || sum_k sqrt(gamma_k) e^{i theta_k} |psi_k> ||^2.
    Vector stationarity;
    double max_imaginary = 0.0;
    /// p in [0,1]^n and p_bar <= 1.
    bool physical = false;
};

/// Evaluates p_i = e^{-i theta_i} sum_k e^{i theta_k} sqrt(gamma_k/gamma_i) X_ik
/// and p_bar = v^dagger X v with v_k = sqrt(gamma_k) e^{i theta_k}. Never
/// claims optimality on its own.
inline PhaseReconstruction reconstruct_from_phases(const GramMatrix& X, const Vector& gamma,
                                                   const PhaseVector& phases) {
    detail::require_size(X, gamma, "priors");
    detail::require_size(X, phases.thetas, "phases");
    const Index n = X.size();
    CVector v(n);
    for (Index k = 0; k < n; ++k) v(k) = std::sqrt(gamma(k)) * std::polar(1.0, phases.thetas(k));
    const CVector Xv = X.entries() * v;

    PhaseReconstruction r;
    r.p.resize(n);
    r.stationarity.resize(n);
    for (Index i = 0; i < n; ++i) {
        if (!(gamma(i) > 0.0)) throw PreconditionFailed("phase reconstruction needs positive priors");
        const cplx pi = std::polar(1.0, -phases.thetas(i)) * Xv(i) / std::sqrt(gamma(i));
        r.max_imaginary = std::max(r.max_imaginary, std::abs(pi.imag()));
        r.p(i) = pi.real();
        r.stationarity(i) = 2.0 * (std::conj(v(i)) * Xv(i)).imag();
    }
    if (r.max_imaginary >= 1e-8) {
        throw ComplexResidue("reconstructed success probability has imaginary part " +
                             std::to_string(r.max_imaginary));
    }
    r.p_bar = v.dot(Xv).real();
    r.physical = r.p.minCoeff() >= -tol::psd && r.p.maxCoeff() <= 1.0 + tol::psd && r.p_bar <= 1.0 + tol::psd;
    return r;
}

// ---------------------------------------------------------------------------
// Star configuration
// ---------------------------------------------------------------------------

/// Closed-form optimum when every state overlaps only the hub state. Returns
/// nothing outside the interior validity regime; the general solver covers it.
inline std::optional<OptimumSolution> star_solution(const StateEnsemble& ensemble, Index hub = 0,
                                                    double tol_cert = SolverConfig{}.tol_cert) {
    const GramMatrix X = gram(ensemble);
    const Vector& gamma = ensemble.priors();
    const Index n = X.size();
    if (hub < 0 || hub >= n) throw PreconditionFailed("hub index out of range");
    for (Index i = 0; i < n; ++i) {
        if (i == hub) continue;
        if (std::abs(X(hub, i)) <= tol::rank) {
            throw StructureMismatch("state " + std::to_string(i) + " is orthogonal to the hub");
        }
        for (Index j = 0; j < n; ++j) {
            if (j != i && j != hub && std::abs(X(i, j)) > tol::rank) {
                throw StructureMismatch("states " + std::to_string(i) + " and " + std::to_string(j) +
                                        " are not orthogonal");
            }
        }
    }
    if (gamma.minCoeff() <= 0.0) return std::nullopt;

    SuccessPoint p(n);
    p(hub) = 1.0;
    for (Index k = 0; k < n; ++k) {
        if (k == hub) continue;
        const double overlap = std::abs(X(k, hub));
        p(k) = 1.0 - std::sqrt(gamma(hub) / gamma(k)) * overlap;
        p(hub) -= std::sqrt(gamma(k) / gamma(hub)) * overlap;
    }
    if (p.minCoeff() <= tol_cert) return std::nullopt;

    OptimumSolution s = detail::make_solution(gamma, p, principal_minors(X, p).sum() / gamma.sum(),
                                              Classification::InteriorNonSingular);
    s.residuals = certify(X, gamma, s, tol_cert);
    return s;
}

// ---------------------------------------------------------------------------
// Generalized equal-probability measurement
// ---------------------------------------------------------------------------

struct GepmResult {
    SuccessPoint p;      // w * sigma_min
    double sigma_min = 0.0;
    Vector minors;       // M_i at p
    /// Priors making p optimal; absent when every minor vanishes (singular
    /// point, optimal for a whole range of priors).
    std::optional<Vector> priors;

    bool singular() const { return !priors.has_value(); }
};

inline GepmResult gepm(const GramMatrix& X, const Vector& weights, double tol_cert = SolverConfig{}.tol_cert) {
    if (weights.size() != X.size()) {
        throw WeightsInvalid("weights: expected " + std::to_string(X.size()) + " entries, got " +
                             std::to_string(weights.size()));
    }
    for (Index i = 0; i < weights.size(); ++i) {
        if (!std::isfinite(weights(i)) || !(weights(i) > 0.0)) {
            throw WeightsInvalid("weights: entry " + std::to_string(i) + " must be positive");
        }
    }
    const Vector scale = weights.cwiseSqrt().cwiseInverse();
    const CMatrix psi_gram = scale.asDiagonal() * X.entries() * scale.asDiagonal();
    GepmResult r;
    r.sigma_min = detail::hermitian_eigenvalues(psi_gram)(0);
    r.p = weights * r.sigma_min;
    r.minors = principal_minors(X, r.p);
    if (r.minors.maxCoeff() > tol_cert) r.priors = Vector(r.minors / r.minors.sum());
    return r;
}

inline GepmResult gepm(const StateEnsemble& ensemble, const Vector& weights,
                       double tol_cert = SolverConfig{}.tol_cert) {
    return gepm(gram(ensemble), weights, tol_cert);
}

// ---------------------------------------------------------------------------
// Three states
// ---------------------------------------------------------------------------

/// Constants of the three-state multiplier equation.
struct ThreeStateConstants {
    double gamma = 0.0;  // gamma_1 gamma_2 gamma_3
    cplx T;              // X_12 X_23 X_31
    double R = 0.0;
    double S = 0.0;
    double Q = 0.0;
    double W = 0.0;
    Vector priors;       // gamma_1..3
    double a12 = 0.0, a13 = 0.0, a23 = 0.0;  // squared overlap moduli

    /// S^3 - 27 gamma |T|^4 >= 0.
    double lambda_cubic_margin() const { return S * S * S - 27.0 * gamma * std::pow(std::norm(T), 2); }
    /// W^3 - 27 |T|^2 >= 0.
    double epm_cubic_margin() const { return W * W * W - 27.0 * std::norm(T); }
};

inline ThreeStateConstants three_state_constants(const GramMatrix& X, const Vector& gamma) {
    if (X.size() != 3) throw UnsupportedDimension("three-state formulas need exactly 3 states");
    detail::require_size(X, gamma, "priors");
    ThreeStateConstants c;
    c.priors = gamma;
    c.a12 = std::norm(X(0, 1));
    c.a13 = std::norm(X(0, 2));
    c.a23 = std::norm(X(1, 2));
    c.gamma = gamma(0) * gamma(1) * gamma(2);
    c.T = X(0, 1) * X(1, 2) * X(2, 0);
    const double t2 = std::norm(c.T);
    c.R = gamma(0) * gamma(1) * c.a12 + gamma(1) * gamma(2) * c.a23 + gamma(0) * gamma(2) * c.a13;
    c.S = gamma(0) * c.a12 * c.a13 + gamma(1) * c.a12 * c.a23 + gamma(2) * c.a23 * c.a13;
    c.Q = c.S * c.S - 4.0 * c.R * t2;
    c.W = c.a12 + c.a13 + c.a23;
    return c;
}

namespace detail {

/// Left-hand side of the radical multiplier equation.
inline double three_state_residual(const ThreeStateConstants& c, double lambda) {
    const double t2 = std::norm(c.T);
    const double radicand = c.gamma * lambda * lambda * lambda + c.R * lambda * lambda + c.S * lambda + t2;
    return c.gamma * lambda * lambda * lambda - c.S * lambda - 2.0 * t2 +
           2.0 * std::sqrt(std::max(0.0, radicand)) * c.T.real();
}

/// Real roots of sum_k coeffs[k] x^k via companion-matrix eigenvalues.
inline std::vector<double> real_polynomial_roots(std::vector<double> coeffs, double imag_tol) {
    double scale = 0.0;
    for (double v : coeffs) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return {};
    while (!coeffs.empty() && std::abs(coeffs.back()) <= 1e-14 * scale) coeffs.pop_back();
    const Index deg = static_cast<Index>(coeffs.size()) - 1;
    if (deg < 1) return {};
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(deg, deg);
    for (Index i = 1; i < deg; ++i) C(i, i - 1) = 1.0;
    for (Index i = 0; i < deg; ++i) C(i, deg - 1) = -coeffs[static_cast<std::size_t>(i)] / coeffs.back();
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
    std::vector<double> out;
    for (Index i = 0; i < deg; ++i) {
        const std::complex<double> z = es.eigenvalues()(i);
        if (std::abs(z.imag()) <= imag_tol * (1.0 + std::abs(z.real()))) out.push_back(z.real());
    }
    return out;
}

}  // namespace detail

/// Non-negative multipliers solving the three-state radical equation. The
/// radical is isolated and squared into a degree-6 polynomial whose real roots
/// are polished on the original equation; squaring artifacts are dropped.
inline std::vector<double> three_state_lambda_poly(const ThreeStateConstants& c) {
    const double t2 = std::norm(c.T);
    const double re = c.T.real();
    // A = gamma l^3 - S l - 2|T|^2,  B = gamma l^3 + R l^2 + S l + |T|^2,
    // A^2 - 4 Re(T)^2 B = 0.
    const std::vector<double> A{-2.0 * t2, -c.S, 0.0, c.gamma};
    const std::vector<double> B{t2, c.S, c.R, c.gamma};
    std::vector<double> P(7, 0.0);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) P[i + j] += A[i] * A[j];
    for (std::size_t i = 0; i < 4; ++i) P[i] -= 4.0 * re * re * B[i];

    auto f = [&](double l) { return detail::three_state_residual(c, l); };
    std::vector<double> out;
    constexpr double accept = 1e-8;
    if (std::abs(f(0.0)) <= accept) out.push_back(0.0);

    for (double l : detail::real_polynomial_roots(P, 1e-6)) {
        if (l < -1e-9) continue;
        l = std::max(l, 0.0);
        for (int step = 0; step < 2; ++step) {
            const double h = 1e-7 * std::max(1.0, l);
            const double d = (f(l + h) - f(std::max(0.0, l - h))) / (l + h - std::max(0.0, l - h));
            if (d == 0.0 || !std::isfinite(d)) break;
            const double next = std::max(0.0, l - f(l) / d);
            if (std::abs(f(next)) < std::abs(f(l))) l = next;
        }
        if (l <= 1e-6 && !out.empty() && out.front() == 0.0) continue;
        if (std::abs(f(l)) > accept) continue;
        const bool dup = std::any_of(out.begin(), out.end(), [&](double m) { return std::abs(m - l) <= 1e-9; });
        if (!dup) out.push_back(l);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Success point belonging to multiplier lambda (non-negative square-root branch).
inline std::optional<SuccessPoint> three_state_point(const ThreeStateConstants& c, double lambda) {
    const Vector& g = c.priors;
    const double d1 = c.a23 + lambda * g(0);
    const double d2 = c.a13 + lambda * g(1);
    const double d3 = c.a12 + lambda * g(2);
    if (!(d1 > 0.0) || !(d2 > 0.0) || !(d3 > 0.0)) return std::nullopt;
    SuccessPoint p(3);
    p(0) = 1.0 - std::sqrt(d3 * d2 / d1);
    p(1) = 1.0 - std::sqrt(d1 * d3 / d2);
    p(2) = 1.0 - std::sqrt(d1 * d2 / d3);
    return p;
}

/// Interior optimum of a three-state problem from the multiplier candidates,
/// passed through `certify`. Absent when no candidate certifies; the general
/// solver is authoritative then.
inline std::optional<OptimumSolution> three_state_solve(const GramMatrix& X, const Vector& gamma,
                                                        double tol_cert = SolverConfig{}.tol_cert) {
    const ThreeStateConstants c = three_state_constants(X, gamma);
    for (double lambda : three_state_lambda_poly(c)) {
        if (!(lambda > tol_cert)) continue;
        const auto p = three_state_point(c, lambda);
        if (!p || p->minCoeff() <= tol_cert) continue;
        OptimumSolution s = detail::make_solution(gamma, *p, lambda, Classification::InteriorNonSingular);
        try {
            s.residuals = certify(X, gamma, s, tol_cert);
            return s;
        } catch (const CertificateViolation&) {
        }
    }
    return std::nullopt;
}

/// Unique positive multiplier when T is purely imaginary (and non-zero).
inline double three_state_case2(const ThreeStateConstants& c) {
    const double tabs = std::abs(c.T);
    if (std::abs(c.T.real()) > 1e-12 || tabs == 0.0) {
        throw PreconditionFailed("case 2 needs a purely imaginary, non-zero triple product");
    }
    if (!(c.S > 0.0) || !(c.gamma > 0.0)) {
        throw PreconditionFailed("case 2 needs S > 0 and positive priors (use the orthogonal-pair case)");
    }
    double arg = (tabs * tabs / c.S) * std::sqrt(27.0 * c.gamma / c.S);
    if (arg > 1.0 + 1e-12 || arg < -1.0 - 1e-12) {
        throw PreconditionFailed("case 2 arccos argument outside [-1, 1]");
    }
    arg = std::clamp(arg, -1.0, 1.0);
    const double theta = std::acos(arg);
    return 2.0 * std::sqrt(c.S / (3.0 * c.gamma)) * std::cos(theta / 3.0);
}

struct EpmResult {
    double p_epm = 1.0;
    double theta = 0.0;
    std::optional<Vector> priors;  // absent at a singular equal-probability point

    bool singular() const { return !priors.has_value(); }
};

/// Equal success probabilities for three states and the priors that make them
/// optimal.
inline EpmResult three_state_epm(const GramMatrix& X, double tol_cert = SolverConfig{}.tol_cert) {
    if (X.size() != 3) throw UnsupportedDimension("three-state formulas need exactly 3 states");
    const double a12 = std::norm(X(0, 1)), a13 = std::norm(X(0, 2)), a23 = std::norm(X(1, 2));
    const double W = a12 + a13 + a23;
    EpmResult r;
    if (W <= tol::rank) return r;

    const cplx T = X(0, 1) * X(1, 2) * X(2, 0);
    // W^3 - 27 Re(T)^2, written through deviations from the mean so that it
    // vanishes exactly when the moduli coincide and T is real.
    const double m = W / 3.0;
    const double u1 = a12 - m, u2 = a13 - m, u3 = a23 - m;
    const double disc = 27.0 * (0.5 * m * (u1 * u1 + u2 * u2 + u3 * u3) - u1 * u2 * u3) + 27.0 * T.imag() * T.imag();
    r.theta = std::atan2(std::sqrt(std::max(0.0, disc)), 3.0 * std::sqrt(3.0) * T.real());
    const double cosine = std::cos(std::numbers::pi / 3.0 - r.theta / 3.0);
    r.p_epm = 1.0 - 2.0 * std::sqrt(W / 3.0) * cosine;

    const double denom = 4.0 * W * cosine * cosine - W;
    if (denom > tol_cert) {
        const double num = 4.0 / 3.0 * W * cosine * cosine;
        Vector g(3);
        g << (num - a23) / denom, (num - a13) / denom, (num - a12) / denom;
        r.priors = g;
    }
    return r;
}

}  // namespace udisc
