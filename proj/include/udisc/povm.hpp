#pragma once

// Optimal measurement operators and a seeded Monte Carlo realization of the
// discrimination experiment.

#include <cstdint>
#include <random>
#include <vector>

#include "udisc/ensemble.hpp"
#include "udisc/feasible.hpp"

namespace udisc {

/// Pi_i = p_i |dual_i><dual_i| and the inconclusive element Pi_0, as d x d
/// matrices. Pi_0 completes the set to the projector onto the span of the
/// states, or to the identity when `ambient` is set.
struct PovmSet {
    std::vector<CMatrix> elements;
    CMatrix inconclusive;
    CMatrix span_projector;
    bool ambient = false;

    /// || Pi_0 + sum Pi_i - target ||_max, target = I (ambient) or P_span.
    double completeness_residual() const {
        CMatrix total = inconclusive;
        for (const auto& e : elements) total += e;
        const CMatrix target =
            ambient ? CMatrix(CMatrix::Identity(total.rows(), total.cols())) : span_projector;
        return (total - target).cwiseAbs().maxCoeff();
    }

    /// Smallest eigenvalue over all elements (Pi_0 included).
    double min_eigenvalue() const {
        double m = detail::hermitian_eigenvalues(inconclusive)(0);
        for (const auto& e : elements) m = std::min(m, detail::hermitian_eigenvalues(e)(0));
        return m;
    }
};

inline PovmSet build_povm(const StateEnsemble& ensemble, const SuccessPoint& p, bool ambient = false) {
    const GramMatrix X = gram(ensemble);
    detail::require_size(X, p, "success point");
    const FeasibilityReport fr = check_feasible(X, p);
    if (!fr.feasible) {
        throw InfeasiblePoint("success point is infeasible (sigma_min = " + std::to_string(fr.sigma_min) +
                              ", min p = " + std::to_string(fr.gamma_min) + ")");
    }
    const CMatrix& phi = ensemble.states();
    const CMatrix Xinv = X.inverse();
    const CMatrix dual = phi * Xinv;

    PovmSet povm;
    povm.ambient = ambient;
    povm.span_projector = phi * Xinv * phi.adjoint();
    povm.span_projector = 0.5 * (povm.span_projector + povm.span_projector.adjoint()).eval();
    povm.inconclusive = povm.span_projector;
    for (Index i = 0; i < ensemble.size(); ++i) {
        CMatrix e = p(i) * dual.col(i) * dual.col(i).adjoint();
        povm.inconclusive -= e;
        povm.elements.push_back(std::move(e));
    }
    if (ambient) povm.inconclusive += CMatrix::Identity(phi.rows(), phi.rows()) - povm.span_projector;
    povm.inconclusive = 0.5 * (povm.inconclusive + povm.inconclusive.adjoint()).eval();

    const double m0 = detail::hermitian_eigenvalues(povm.inconclusive)(0);
    if (m0 < -tol::psd) {
        throw InfeasiblePoint("inconclusive element is indefinite (min eigenvalue " + std::to_string(m0) + ")");
    }
    return povm;
}

/// (p(1|i), ..., p(n|i), p(0|i)) for prepared state i (0-based).
inline Vector outcome_distribution(const PovmSet& povm, const StateEnsemble& ensemble, Index i) {
    const Index n = static_cast<Index>(povm.elements.size());
    if (i < 0 || i >= ensemble.size()) throw DimensionMismatch("prepared index out of range");
    const CVector psi = ensemble.state(i);
    Vector out(n + 1);
    for (Index j = 0; j < n; ++j) out(j) = psi.dot(povm.elements[static_cast<std::size_t>(j)] * psi).real();
    out(n) = psi.dot(povm.inconclusive * psi).real();
    return out;
}

struct SimulationReport {
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    int shards = 1;
    /// counts[i][j]: prepared i, outcome j; column n is the inconclusive outcome.
    std::vector<std::vector<std::uint64_t>> counts;
    double empirical_success = 0.0;
    double empirical_error = 0.0;
};

namespace detail {

inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline Index sample_cdf(const std::vector<double>& cdf, double u) {
    for (std::size_t k = 0; k < cdf.size(); ++k) {
        if (u < cdf[k]) return static_cast<Index>(k);
    }
    return static_cast<Index>(cdf.size()) - 1;
}

inline std::vector<double> cumulative(const Vector& w) {
    std::vector<double> cdf(static_cast<std::size_t>(w.size()));
    double acc = 0.0;
    for (Index k = 0; k < w.size(); ++k) {
        acc += std::max(0.0, w(k));
        cdf[static_cast<std::size_t>(k)] = acc;
    }
    for (double& c : cdf) c /= acc;
    return cdf;
}

}  // namespace detail

/// Draws the prepared state from the priors and the outcome from the Born
/// rule, `trials` times. Uses mt19937_64; shard s is seeded with
/// seed_seq{seed_lo, seed_hi, s}, so results depend only on (seed, shards).
inline SimulationReport simulate(const PovmSet& povm, const StateEnsemble& ensemble, std::uint64_t trials,
                                 std::uint64_t seed, int shards = 1) {
    if (trials < 1) throw InputError("trials must be at least 1");
    if (shards < 1) throw InputError("shards must be at least 1");
    const Index n = ensemble.size();
    const std::vector<double> prior_cdf = detail::cumulative(ensemble.priors());
    std::vector<std::vector<double>> outcome_cdf;
    for (Index i = 0; i < n; ++i) outcome_cdf.push_back(detail::cumulative(outcome_distribution(povm, ensemble, i)));

    SimulationReport r;
    r.trials = trials;
    r.seed = seed;
    r.shards = shards;
    r.counts.assign(static_cast<std::size_t>(n), std::vector<std::uint64_t>(static_cast<std::size_t>(n + 1), 0));
    const auto s = static_cast<std::uint64_t>(shards);
    for (std::uint64_t shard = 0; shard < s; ++shard) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(shard)};
        std::mt19937_64 rng(seq);
        const std::uint64_t share = trials / s + (shard < trials % s ? 1 : 0);
        for (std::uint64_t t = 0; t < share; ++t) {
            const Index i = detail::sample_cdf(prior_cdf, detail::unit_uniform(rng));
            const Index j = detail::sample_cdf(outcome_cdf[static_cast<std::size_t>(i)], detail::unit_uniform(rng));
            ++r.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    std::uint64_t success = 0, error = 0;
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            const auto c = r.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            (i == j ? success : error) += c;
        }
    }
    r.empirical_success = static_cast<double>(success) / static_cast<double>(trials);
    r.empirical_error = static_cast<double>(error) / static_cast<double>(trials);
    return r;
}

}  // namespace udisc
