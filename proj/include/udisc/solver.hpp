#pragma once

// Optimum search: interior stationarity system, boundary faces, singular
// points, in that order, plus the certificate check shared by all of them.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "udisc/ensemble.hpp"
#include "udisc/feasible.hpp"
#include "udisc/newton.hpp"

namespace udisc {

enum class Classification { InteriorNonSingular, Boundary, Singular };

inline const char* to_string(Classification c) {
    switch (c) {
        case Classification::InteriorNonSingular: return "interior";
        case Classification::Boundary: return "boundary";
        case Classification::Singular: return "singular";
    }
    return "unknown";
}

inline std::optional<Classification> classification_from_string(const std::string& s) {
    if (s == "interior") return Classification::InteriorNonSingular;
    if (s == "boundary") return Classification::Boundary;
    if (s == "singular") return Classification::Singular;
    return std::nullopt;
}

struct SolverConfig {
    double tol_newton = 1e-12;
    int max_iter = 100;
    int multistarts = 32;
    std::uint64_t rng_seed = 0;
    double tol_cert = 1e-8;

    void validate() const {
        if (!(tol_newton > 0.0) || !(tol_cert > 0.0)) throw InputError("solver tolerances must be positive");
        if (max_iter < 1) throw InputError("max_iter must be at least 1");
        if (multistarts < 0) throw InputError("multistarts must be non-negative");
    }
};

using ResidualMap = std::map<std::string, double>;

struct OptimumSolution {
    SuccessPoint p_opt;
    double lambda = 0.0;
    double p_bar = 0.0;
    Classification classification = Classification::Singular;
    std::vector<Index> zero_set;  // 0-based, only for Boundary
    ResidualMap residuals;
};

/// A root of one of the stationarity systems: success point plus multiplier.
struct StationaryPoint {
    SuccessPoint p;
    double lambda = 0.0;
};

/// Uniform direction in the positive orthant of the unit sphere, each
/// component floored at 1e-6.
inline Vector random_orthant_direction(std::mt19937_64& rng, Index n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector d(n);
    for (Index i = 0; i < n; ++i) d(i) = std::abs(normal(rng));
    const double nrm = d.norm();
    if (nrm > 0.0) d /= nrm;
    return d.cwiseMax(1e-6);
}

namespace detail {

inline NewtonOptions newton_options(const SolverConfig& cfg) {
    NewtonOptions o;
    o.tolerance = cfg.tol_newton;
    o.max_iter = cfg.max_iter;
    return o;
}

/// Approximate maximizer of gamma . p over the feasible set, from a damped
/// Newton ascent on t gamma . p + log det(X - diag(p)) + sum log p_i with t
/// increased tenfold up to 1e10. Absent when X is singular.
inline std::optional<SuccessPoint> barrier_point(const GramMatrix& X, const Vector& gamma) {
    const Index n = X.size();
    const double s = X.sigma_min();
    if (!(s > tol::rank) || !gamma.allFinite()) return std::nullopt;
    const CMatrix& Xe = X.entries();
    auto objective = [&](const Vector& q, double t) {
        if (!(q.minCoeff() > 0.0)) return -std::numeric_limits<double>::infinity();
        CMatrix A = Xe;
        A.diagonal() -= q.cast<cplx>();
        Eigen::LLT<CMatrix> llt(A);
        if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
        const Vector d = llt.matrixLLT().diagonal().real();
        if (!(d.minCoeff() > 0.0)) return -std::numeric_limits<double>::infinity();
        return t * gamma.dot(q) + 2.0 * d.array().log().sum() + q.array().log().sum();
    };

    SuccessPoint p = Vector::Constant(n, 0.5 * s);
    for (double t = 1.0; t <= 1e10; t *= 10.0) {
        for (int it = 0; it < 100; ++it) {
            CMatrix A = Xe;
            A.diagonal() -= p.cast<cplx>();
            const CMatrix B = A.llt().solve(CMatrix::Identity(n, n));
            const Vector g = t * gamma - B.diagonal().real() + p.cwiseInverse();
            Eigen::MatrixXd H = B.cwiseAbs2();
            H.diagonal() += p.cwiseInverse().cwiseAbs2();
            const Vector step = H.ldlt().solve(g);
            const double decrement = g.dot(step);
            if (!step.allFinite() || !(decrement > 1e-14)) break;
            const double f0 = objective(p, t);
            double alpha = 1.0;
            while (alpha > 1e-12 && !(objective(p + alpha * step, t) >= f0 + 0.25 * alpha * decrement)) alpha *= 0.5;
            if (!(alpha > 1e-12)) break;
            p += alpha * step;
        }
    }
    return p;
}

/// Starting points on the critical surface restricted to the coordinates in
/// `free`: the ray through `hint` (if given), the equal-ratio point, then
/// `cfg.multistarts` random rays ordered by decreasing gamma . p.
inline std::vector<SuccessPoint> surface_starts(const GramMatrix& X, const Vector& gamma,
                                                const std::vector<Index>& free, const SolverConfig& cfg,
                                                const std::optional<SuccessPoint>& hint = std::nullopt) {
    const Index n = X.size();
    RayCaster caster(X);
    std::vector<SuccessPoint> starts;
    if (hint) {
        Vector h = Vector::Zero(n);
        for (Index i : free) h(i) = std::max((*hint)(i), 1e-6);
        starts.push_back(caster.cast(h));
    }
    Vector d = Vector::Zero(n);
    for (Index i : free) d(i) = 1.0;
    starts.push_back(caster.cast(d));

    std::mt19937_64 rng(cfg.rng_seed);
    std::vector<SuccessPoint> random;
    random.reserve(static_cast<std::size_t>(cfg.multistarts));
    for (int s = 0; s < cfg.multistarts; ++s) {
        const Vector r = random_orthant_direction(rng, static_cast<Index>(free.size()));
        Vector dir = Vector::Zero(n);
        for (std::size_t k = 0; k < free.size(); ++k) dir(free[k]) = r(static_cast<Index>(k));
        random.push_back(caster.cast(dir));
    }
    std::stable_sort(random.begin(), random.end(), [&](const SuccessPoint& a, const SuccessPoint& b) {
        return gamma.dot(a) > gamma.dot(b);
    });
    starts.insert(starts.end(), random.begin(), random.end());
    return starts;
}

inline std::vector<Index> complement(Index n, const std::vector<Index>& zero_set) {
    std::vector<Index> free;
    for (Index i = 0; i < n; ++i) {
        if (std::find(zero_set.begin(), zero_set.end(), i) == zero_set.end()) free.push_back(i);
    }
    return free;
}

/// Solves {M_i(p) = gamma_i lambda (i free), det(X - diag(p)) = 0} with
/// p_i = 0 on the zero set. An empty zero set is the interior system.
inline std::optional<StationaryPoint> solve_face(const GramMatrix& X, const Vector& gamma,
                                                 const std::vector<Index>& zero_set, const SolverConfig& cfg,
                                                 const std::optional<SuccessPoint>& hint) {
    const Index n = X.size();
    const std::vector<Index> free = complement(n, zero_set);
    const Index m = static_cast<Index>(free.size());
    if (m == 0) return std::nullopt;

    auto expand = [&](const Vector& z) {
        SuccessPoint p = SuccessPoint::Zero(n);
        for (Index k = 0; k < m; ++k) p(free[static_cast<std::size_t>(k)]) = z(k);
        return p;
    };
    auto residual = [&](const Vector& z) {
        const SuccessPoint p = expand(z);
        const CMatrix A = shifted(X, p);
        Vector out(m + 1);
        for (Index k = 0; k < m; ++k) {
            const Index i = free[static_cast<std::size_t>(k)];
            out(k) = detail::hermitian_det(detail::delete_row_col(A, i)) - gamma(i) * z(m);
        }
        out(m) = detail::hermitian_det(A);
        return out;
    };

    double gamma_free = 0.0;
    for (Index i : free) gamma_free += gamma(i);

    NewtonOptions opts = newton_options(cfg);
    opts.bound = 10.0 + 10.0 / std::max(gamma.minCoeff(), 1e-12);
    for (const SuccessPoint& start : surface_starts(X, gamma, free, cfg, hint)) {
        const Vector minors = principal_minors(X, start);
        double mfree = 0.0;
        for (Index i : free) mfree += minors(i);
        Vector z0(m + 1);
        for (Index k = 0; k < m; ++k) z0(k) = start(free[static_cast<std::size_t>(k)]);
        z0(m) = gamma_free > 0.0 ? mfree / gamma_free : mfree;

        const NewtonResult res = newton_solve(residual, z0, opts);
        if (!res.converged) continue;
        const double lambda = res.x(m);
        if (!(lambda > cfg.tol_cert)) continue;
        if (!(res.x.head(m).minCoeff() > cfg.tol_cert)) continue;
        const SuccessPoint p = expand(res.x);
        if (!check_feasible(X, p).feasible) continue;
        if (!zero_set.empty()) {
            const Vector mk = principal_minors(X, p);
            bool slack_ok = true;
            for (Index i : zero_set) slack_ok = slack_ok && (mk(i) - lambda * gamma(i) >= -cfg.tol_cert);
            if (!slack_ok) continue;
        }
        return StationaryPoint{p, lambda};
    }
    return std::nullopt;
}

}  // namespace detail

inline double average_success(const Vector& gamma, const SuccessPoint& p) { return gamma.dot(p); }

/// Interior non-singular candidate: all p_i > 0, lambda > 0, X - diag(p) >= 0.
inline std::optional<StationaryPoint> solve_interior(const GramMatrix& X, const Vector& gamma,
                                                     const SolverConfig& cfg = {}) {
    detail::require_size(X, gamma, "priors");
    return detail::solve_face(X, gamma, {}, cfg, detail::barrier_point(X, gamma));
}

/// Candidate on the face p_i = 0 (i in zero_set), including the slack
/// inequalities M_i >= lambda gamma_i on the zeroed coordinates.
inline std::optional<StationaryPoint> solve_boundary(const GramMatrix& X, const Vector& gamma,
                                                     const std::vector<Index>& zero_set,
                                                     const SolverConfig& cfg = {}) {
    detail::require_size(X, gamma, "priors");
    if (zero_set.empty() || static_cast<Index>(zero_set.size()) >= X.size()) {
        throw PreconditionFailed("zero set must be a non-empty proper subset");
    }
    for (Index i : zero_set) {
        if (i < 0 || i >= X.size()) throw PreconditionFailed("zero set index out of range");
    }
    return detail::solve_face(X, gamma, zero_set, cfg, detail::barrier_point(X, gamma));
}

namespace detail {

inline std::optional<SuccessPoint> solve_singular(const GramMatrix& X, const Vector& gamma, const SolverConfig& cfg,
                                                  const std::optional<SuccessPoint>& hint) {
    const Index n = X.size();
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Index{0});
    NewtonOptions opts = newton_options(cfg);
    opts.bound = 10.0;

    std::vector<SuccessPoint> found;
    auto keep = [&](const SuccessPoint& p) {
        if (!check_feasible(X, p).on_critical_surface) return;
        const bool seen = std::any_of(found.begin(), found.end(), [&](const SuccessPoint& q) {
            return (q - p).lpNorm<Eigen::Infinity>() < 1e-6;
        });
        if (!seen) found.push_back(p);
    };

    // First candidate: the barrier point projected onto the singular set,
    // its vanishing coordinates held at zero.
    if (hint) {
        std::vector<Index> free;
        for (Index i = 0; i < n; ++i) {
            if ((*hint)(i) > 1e-7) free.push_back(i);
        }
        if (!free.empty()) {
            auto expand = [&](const Vector& z) {
                SuccessPoint p = SuccessPoint::Zero(n);
                for (std::size_t k = 0; k < free.size(); ++k) p(free[k]) = z(static_cast<Index>(k));
                return p;
            };
            Vector z0(static_cast<Index>(free.size()));
            for (std::size_t k = 0; k < free.size(); ++k) z0(static_cast<Index>(k)) = (*hint)(free[k]);
            const NewtonResult res =
                newton_solve([&](const Vector& z) { return principal_minors(X, expand(z)); }, z0, opts);
            if (res.converged) keep(expand(res.x));
        }
    }

    auto residual = [&](const Vector& p) { return principal_minors(X, p); };
    for (const SuccessPoint& start : surface_starts(X, gamma, all, cfg)) {
        const NewtonResult res = newton_solve(residual, start, opts);
        if (res.converged) keep(res.x);
    }
    if (found.empty()) return std::nullopt;
    return *std::max_element(found.begin(), found.end(), [&](const SuccessPoint& a, const SuccessPoint& b) {
        const double va = gamma.dot(a), vb = gamma.dot(b);
        if (va != vb) return va < vb;
        return std::lexicographical_compare(b.data(), b.data() + b.size(), a.data(), a.data() + a.size());
    });
}

}  // namespace detail

/// Best feasible point with all principal minors zero, if any.
inline std::optional<SuccessPoint> solve_singular(const GramMatrix& X, const Vector& gamma,
                                                  const SolverConfig& cfg = {}) {
    detail::require_size(X, gamma, "priors");
    return detail::solve_singular(X, gamma, cfg, detail::barrier_point(X, gamma));
}

/// Recomputes every invariant of `sol`'s classification. Throws
/// CertificateViolation naming the first failing residual.
inline ResidualMap certify(const GramMatrix& X, const Vector& gamma, const OptimumSolution& sol,
                           double tol_cert = SolverConfig{}.tol_cert) {
    const SuccessPoint& p = sol.p_opt;
    detail::require_size(X, p, "solution");
    ResidualMap r;
    auto require = [&](const std::string& name, double value, bool ok, double tolerance) {
        r[name] = value;
        if (!ok) throw CertificateViolation(name, value, tolerance);
    };

    const FeasibilityReport fr = check_feasible(X, p);
    const Vector minors = principal_minors(X, p);
    r["det"] = det_xg(X, p);
    require("sigma_min", fr.sigma_min, fr.sigma_min >= -tol::psd, tol::psd);
    require("p_min", fr.gamma_min, fr.gamma_min >= -tol::psd, tol::psd);
    require("surface", std::abs(fr.sigma_min), std::abs(fr.sigma_min) <= tol::surface, tol::surface);
    const double pbar_err = std::abs(sol.p_bar - gamma.dot(p));
    require("p_bar", pbar_err, pbar_err <= 1e-12 && sol.p_bar >= -tol::psd && sol.p_bar <= 1.0 + tol::psd, 1e-12);

    switch (sol.classification) {
        case Classification::InteriorNonSingular: {
            require("lambda", sol.lambda, sol.lambda > tol_cert, tol_cert);
            const double prop = (minors - sol.lambda * gamma).lpNorm<Eigen::Infinity>();
            require("minor_proportionality", prop, prop <= tol_cert, tol_cert);
            // grad sigma_n = -gamma; sigma_n is a simple eigenvalue here.
            const double h = 1e-6;
            Vector grad(p.size());
            for (Index k = 0; k < p.size(); ++k) {
                SuccessPoint a = p, b = p;
                a(k) += h;
                b(k) -= h;
                grad(k) = (min_eigenvalue(X, a) - min_eigenvalue(X, b)) / (2.0 * h);
            }
            const double gerr = (grad + gamma).lpNorm<Eigen::Infinity>();
            require("gradient", gerr, gerr <= 1e-4, 1e-4);
            break;
        }
        case Classification::Boundary: {
            require("lambda", sol.lambda, sol.lambda > tol_cert, tol_cert);
            if (sol.zero_set.empty()) throw CertificateViolation("zero_set", 0.0, 0.0);
            double zmax = 0.0, slack = std::numeric_limits<double>::infinity(), prop = 0.0;
            for (Index i = 0; i < p.size(); ++i) {
                const bool zeroed = std::find(sol.zero_set.begin(), sol.zero_set.end(), i) != sol.zero_set.end();
                if (zeroed) {
                    zmax = std::max(zmax, std::abs(p(i)));
                    slack = std::min(slack, minors(i) - sol.lambda * gamma(i));
                } else {
                    prop = std::max(prop, std::abs(minors(i) - sol.lambda * gamma(i)));
                }
            }
            require("zero_set", zmax, zmax <= tol::psd, tol::psd);
            require("minor_proportionality", prop, prop <= tol_cert, tol_cert);
            require("slack", slack, slack >= -tol_cert, tol_cert);
            break;
        }
        case Classification::Singular: {
            const double mmax = minors.cwiseAbs().maxCoeff();
            require("max_minor", mmax, mmax <= tol_cert, tol_cert);
            break;
        }
    }
    return r;
}

namespace detail {

inline OptimumSolution make_solution(const Vector& gamma, SuccessPoint p, double lambda, Classification c,
                                     std::vector<Index> zero_set = {}) {
    OptimumSolution s;
    s.p_bar = gamma.dot(p);
    s.p_opt = std::move(p);
    s.lambda = lambda;
    s.classification = c;
    s.zero_set = std::move(zero_set);
    return s;
}

/// Connected components of the graph |X_ij| > tol::rank.
inline std::vector<std::vector<Index>> orthogonal_blocks(const GramMatrix& X) {
    const Index n = X.size();
    std::vector<Index> label(static_cast<std::size_t>(n), -1);
    std::vector<std::vector<Index>> blocks;
    for (Index s = 0; s < n; ++s) {
        if (label[static_cast<std::size_t>(s)] >= 0) continue;
        std::vector<Index> block{s}, stack{s};
        label[static_cast<std::size_t>(s)] = static_cast<Index>(blocks.size());
        while (!stack.empty()) {
            const Index i = stack.back();
            stack.pop_back();
            for (Index j = 0; j < n; ++j) {
                if (label[static_cast<std::size_t>(j)] < 0 && std::abs(X(i, j)) > tol::rank) {
                    label[static_cast<std::size_t>(j)] = static_cast<Index>(blocks.size());
                    block.push_back(j);
                    stack.push_back(j);
                }
            }
        }
        std::sort(block.begin(), block.end());
        blocks.push_back(std::move(block));
    }
    return blocks;
}

inline void combinations(Index n, Index k, Index start, std::vector<Index>& cur,
                         std::vector<std::vector<Index>>& out) {
    if (static_cast<Index>(cur.size()) == k) {
        out.push_back(cur);
        return;
    }
    for (Index i = start; i < n; ++i) {
        cur.push_back(i);
        combinations(n, k, i + 1, cur, out);
        cur.pop_back();
    }
}

}  // namespace detail

/// Full optimum search on (X, gamma). See `optimize` for the ensemble form.
inline OptimumSolution optimize(const GramMatrix& X, const Vector& gamma, const SolverConfig& cfg = {}) {
    cfg.validate();
    detail::require_size(X, gamma, "priors");
    const Index n = X.size();

    auto finish = [&](OptimumSolution s) {
        const ResidualMap r = certify(X, gamma, s, cfg.tol_cert);
        s.residuals.insert(r.begin(), r.end());
        return s;
    };

    // Mutually orthogonal states are discriminated perfectly.
    CMatrix off = X.entries();
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() < tol::rank) {
        return finish(detail::make_solution(gamma, SuccessPoint::Ones(n), 0.0, Classification::Singular));
    }

    // Orthogonal blocks decouple; each is solved on its own and the combined
    // point has a degenerate zero eigenvalue, hence is singular.
    const auto blocks = detail::orthogonal_blocks(X);
    if (blocks.size() > 1) {
        SuccessPoint p = SuccessPoint::Zero(n);
        for (const auto& block : blocks) {
            const Index m = static_cast<Index>(block.size());
            if (m == 1) {
                p(block[0]) = 1.0;
                continue;
            }
            CMatrix sub(m, m);
            Vector g(m);
            for (Index a = 0; a < m; ++a) {
                g(a) = gamma(block[static_cast<std::size_t>(a)]);
                for (Index b = 0; b < m; ++b) sub(a, b) = X(block[static_cast<std::size_t>(a)], block[static_cast<std::size_t>(b)]);
            }
            g = g.sum() > 0.0 ? Vector(g / g.sum()) : Vector(Vector::Constant(m, 1.0 / static_cast<double>(m)));
            const OptimumSolution part = optimize(GramMatrix::from_matrix(sub), g, cfg);
            for (Index a = 0; a < m; ++a) p(block[static_cast<std::size_t>(a)]) = part.p_opt(a);
        }
        OptimumSolution s = detail::make_solution(gamma, std::move(p), 0.0, Classification::Singular);
        s.residuals["orthogonal_blocks"] = static_cast<double>(blocks.size());
        return finish(std::move(s));
    }

    std::string last_failure = "none";
    const std::optional<SuccessPoint> hint = detail::barrier_point(X, gamma);
    // Step I: interior stationarity system.
    if (auto cand = detail::solve_face(X, gamma, {}, cfg, hint)) {
        try {
            return finish(detail::make_solution(gamma, cand->p, cand->lambda, Classification::InteriorNonSingular));
        } catch (const CertificateViolation& e) {
            last_failure = e.what();
        }
    }

    // Step II: the face where the barrier point vanishes, then all faces by
    // increasing number of zeroed components.
    if (hint) {
        std::vector<Index> Z;
        for (Index i = 0; i < n; ++i) {
            if ((*hint)(i) <= 1e-6) Z.push_back(i);
        }
        if (!Z.empty() && static_cast<Index>(Z.size()) < n) {
            if (auto cand = detail::solve_face(X, gamma, Z, cfg, hint)) {
                try {
                    return finish(detail::make_solution(gamma, cand->p, cand->lambda, Classification::Boundary, Z));
                } catch (const CertificateViolation& e) {
                    last_failure = e.what();
                }
            }
        }
    }
    for (Index k = 1; k < n; ++k) {
        std::vector<std::vector<Index>> sets;
        std::vector<Index> cur;
        detail::combinations(n, k, 0, cur, sets);
        std::vector<OptimumSolution> accepted;
        for (const auto& Z : sets) {
            if (auto cand = detail::solve_face(X, gamma, Z, cfg, hint)) {
                try {
                    accepted.push_back(
                        finish(detail::make_solution(gamma, cand->p, cand->lambda, Classification::Boundary, Z)));
                } catch (const CertificateViolation& e) {
                    last_failure = e.what();
                }
            }
        }
        if (!accepted.empty()) {
            OptimumSolution s = std::move(accepted.front());
            s.residuals["boundary_alternatives"] = static_cast<double>(accepted.size() - 1);
            return s;
        }
    }

    // Step III: singular points.
    if (auto p = detail::solve_singular(X, gamma, cfg, hint)) {
        try {
            return finish(detail::make_solution(gamma, *p, 0.0, Classification::Singular));
        } catch (const CertificateViolation& e) {
            last_failure = e.what();
        }
    }

    throw SolverFailure("no interior, boundary or singular optimum found (sigma_min(X) = " +
                        std::to_string(X.sigma_min()) + ", cond(X) = " + std::to_string(X.condition_number()) +
                        ", last certificate failure: " + last_failure + ")");
}

inline OptimumSolution optimize(const StateEnsemble& ensemble, const SolverConfig& cfg = {}) {
    return optimize(gram(ensemble), ensemble.priors(), cfg);
}

}  // namespace udisc
