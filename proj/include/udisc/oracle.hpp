#pragma once

// Brute-force maximization of gamma . p over the critical surface by ray
// sampling and pattern search. Independent of the stationarity systems.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "udisc/feasible.hpp"
#include "udisc/solver.hpp"

namespace udisc {

struct SurfaceSample {
    std::vector<SuccessPoint> points;
    SuccessPoint best;
    double best_value = 0.0;
};

namespace detail {

inline bool better_point(double va, const SuccessPoint& a, double vb, const SuccessPoint& b) {
    if (va != vb) return va > vb;
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

}  // namespace detail

/// `count` surface points along uniformly random positive rays, ranked by gamma . p.
inline SurfaceSample sample_surface(const GramMatrix& X, const Vector& gamma, std::size_t count,
                                    std::uint64_t seed) {
    detail::require_size(X, gamma, "priors");
    if (count < 1) throw InputError("sample count must be at least 1");
    std::mt19937_64 rng(seed);
    RayCaster caster(X);
    SurfaceSample s;
    s.points.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        s.points.push_back(caster.cast(random_orthant_direction(rng, X.size())));
        const double v = gamma.dot(s.points.back());
        if (k == 0 || detail::better_point(v, s.points.back(), s.best_value, s.best)) {
            s.best = s.points.back();
            s.best_value = v;
        }
    }
    return s;
}

/// Pattern search over ray directions, re-projecting every trial onto the
/// surface. gamma . p never decreases; the step halves after a failed poll,
/// doubles (up to 0.25) after a successful one, and the search stops below 1e-9.
inline SuccessPoint refine(const GramMatrix& X, const Vector& gamma, const SuccessPoint& start, int iters) {
    detail::require_size(X, gamma, "priors");
    detail::require_size(X, start, "start");
    constexpr double floor = 1e-6;
    const Index n = X.size();
    RayCaster caster(X);

    Vector dir = start.cwiseMax(0.0);
    if (dir.maxCoeff() <= 0.0) dir.setOnes();
    dir = (dir / dir.maxCoeff()).cwiseMax(floor);

    // Poll directions: +-e_j, +-(e_j - e_k), +-(e_j + e_k), then 2n random
    // unit directions redrawn on every poll.
    std::vector<Vector> polls;
    for (Index j = 0; j < n; ++j) {
        for (double sign : {1.0, -1.0}) polls.push_back(sign * Vector::Unit(n, j));
    }
    for (Index j = 0; j < n; ++j) {
        for (Index k = j + 1; k < n; ++k) {
            for (double sign : {1.0, -1.0}) {
                polls.push_back(sign * (Vector::Unit(n, j) - Vector::Unit(n, k)));
                polls.push_back(sign * (Vector::Unit(n, j) + Vector::Unit(n, k)));
            }
        }
    }

    const std::size_t fixed = polls.size();
    polls.resize(fixed + static_cast<std::size_t>(2 * n));
    std::mt19937_64 rng(static_cast<std::uint64_t>(n));
    std::normal_distribution<double> normal(0.0, 1.0);

    SuccessPoint best = start;
    double best_value = gamma.dot(start);
    double step = 0.25;
    for (int it = 0; it < iters && step >= 1e-9; ++it) {
        for (std::size_t k = fixed; k < polls.size(); ++k) {
            Vector r(n);
            for (Index i = 0; i < n; ++i) r(i) = normal(rng);
            polls[k] = r / r.norm();
        }
        bool improved = false;
        for (const Vector& poll : polls) {
            Vector trial = (dir + step * poll).cwiseMax(floor);
            trial /= trial.maxCoeff();
            const SuccessPoint p = caster.cast(trial);
            const double v = gamma.dot(p);
            if (v > best_value + 1e-15) {
                best = p;
                best_value = v;
                dir = trial;
                improved = true;
                break;
            }
        }
        step = improved ? std::min(2.0 * step, 0.25) : 0.5 * step;
    }
    return best;
}

struct OracleResult {
    SuccessPoint best;
    double best_value = 0.0;
};

/// Sampling followed by refinement of the best sample.
inline OracleResult oracle_maximize(const GramMatrix& X, const Vector& gamma, std::size_t samples,
                                    int refine_iters, std::uint64_t seed) {
    const SurfaceSample s = sample_surface(X, gamma, samples, seed);
    OracleResult r;
    r.best = refine(X, gamma, s.best, refine_iters);
    r.best_value = gamma.dot(r.best);
    return r;
}

}  // namespace udisc
