#pragma once

// Randomized property checks shared by the unit suite and the acceptance run.
// Each returns the number of violations over `trials` draws.

#include <algorithm>
#include <random>

#include "support.hpp"
#include "udisc/closedform.hpp"
#include "udisc/feasible.hpp"

namespace udisc::testing {

struct PropertyStats {
    int trials = 0;
    int failures = 0;
    double worst = 0.0;
};

inline Vector uniform_vector(std::mt19937_64& rng, Index n, double lo, double hi) {
    std::uniform_real_distribution<double> U(lo, hi);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = U(rng);
    return v;
}

/// Random feasible point: a surface point scaled towards the origin.
inline SuccessPoint random_feasible(std::mt19937_64& rng, const GramMatrix& X) {
    const SuccessPoint s = ray_to_surface(X, uniform_vector(rng, X.size(), 1e-3, 1.0));
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) * s;
}

inline PropertyStats convexity(std::mt19937_64& rng, int trials) {
    PropertyStats st;
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        const Index n = 2 + t % 5;
        const GramMatrix X = gram(random_ensemble(rng, n, n + t % 2));
        const SuccessPoint a = random_feasible(rng, X), b = random_feasible(rng, X);
        const double eps = U(rng);
        const double s = min_eigenvalue(X, eps * a + (1.0 - eps) * b);
        ++st.trials;
        st.worst = std::min(st.worst, s);
        if (!check_feasible(X, eps * a + (1.0 - eps) * b).feasible) ++st.failures;
    }
    return st;
}

inline PropertyStats monotonicity(std::mt19937_64& rng, int trials) {
    PropertyStats st;
    for (int t = 0; t < trials; ++t) {
        const Index n = 2 + t % 5;
        const GramMatrix X = gram(random_ensemble(rng, n, n));
        const SuccessPoint p = uniform_vector(rng, n, 0.0, 1.0);
        const SuccessPoint q = p + uniform_vector(rng, n, 0.0, 0.3);
        const double excess = min_eigenvalue(X, q) - min_eigenvalue(X, p);
        ++st.trials;
        st.worst = std::max(st.worst, excess);
        if (excess > 1e-12) ++st.failures;
    }
    return st;
}

/// d det(X - diag(p)) / dp_k = -M_k(p), central differences with step 1e-6.
inline PropertyStats laplace_identity(std::mt19937_64& rng, int trials) {
    PropertyStats st;
    const double h = 1e-6;
    for (int t = 0; t < trials; ++t) {
        const Index n = 2 + t % 5;
        const GramMatrix X = gram(random_ensemble(rng, n, n));
        const SuccessPoint p = uniform_vector(rng, n, 0.0, 1.0);
        const Vector M = principal_minors(X, p);
        const double scale = std::max(M.cwiseAbs().maxCoeff(), 1e-3);
        double worst = 0.0;
        for (Index k = 0; k < n; ++k) {
            SuccessPoint a = p, b = p;
            a(k) += h;
            b(k) -= h;
            const double fd = (det_xg(X, a) - det_xg(X, b)) / (2.0 * h);
            worst = std::max(worst, std::abs(fd + M(k)) / scale);
        }
        ++st.trials;
        st.worst = std::max(st.worst, worst);
        if (worst > 1e-5) ++st.failures;
    }
    return st;
}

/// Sum of the order n-1 principal minors equals the (n-1)-th elementary
/// symmetric polynomial of the eigenvalues of X - diag(p).
inline PropertyStats minor_sum_identity(std::mt19937_64& rng, int trials) {
    PropertyStats st;
    for (int t = 0; t < trials; ++t) {
        const Index n = 2 + t % 5;
        const GramMatrix X = gram(random_ensemble(rng, n, n));
        const SuccessPoint p = uniform_vector(rng, n, 0.0, 1.0);
        const Vector ev = spectrum(X, p);
        double e = 0.0;
        for (Index skip = 0; skip < n; ++skip) {
            double prod = 1.0;
            for (Index k = 0; k < n; ++k)
                if (k != skip) prod *= ev(k);
            e += prod;
        }
        const double sum = principal_minors(X, p).sum();
        const double rel = std::abs(sum - e) / std::max(1.0, std::abs(e));
        ++st.trials;
        st.worst = std::max(st.worst, rel);
        if (rel > 1e-8) ++st.failures;
    }
    return st;
}

/// S^3 >= 27 gamma |T|^4 and 27 Re(T)^2 <= 27 |T|^2 <= W^3.
inline PropertyStats three_state_guards(std::mt19937_64& rng, int trials) {
    PropertyStats st;
    for (int t = 0; t < trials; ++t) {
        const StateEnsemble e = random_ensemble(rng, 3, 3 + t % 2, t % 3 != 0);
        const ThreeStateConstants c = three_state_constants(gram(e), e.priors());
        const double t2 = std::norm(c.T);
        const double tol = 1e-14;
        const bool ok = c.lambda_cubic_margin() >= -tol && 27.0 * c.T.real() * c.T.real() <= 27.0 * t2 + tol &&
                        c.epm_cubic_margin() >= -tol && c.Q == c.S * c.S - 4.0 * c.R * t2;
        ++st.trials;
        st.worst = std::min({st.worst, c.lambda_cubic_margin(), c.epm_cubic_margin()});
        if (!ok) ++st.failures;
    }
    return st;
}

}  // namespace udisc::testing
