#pragma once

// Damped Newton iteration for square nonlinear systems with a
// finite-difference Jacobian.

#include <cmath>
#include <limits>

#include "udisc/ensemble.hpp"

namespace udisc {

struct NewtonOptions {
    double tolerance = 1e-12;  // on the max-norm of the residual
    int max_iter = 100;
    double fd_step = 1e-7;
    double bound = std::numeric_limits<double>::infinity();  // abort once |x|_inf exceeds this
};

struct NewtonResult {
    Vector x;
    Vector residual;
    int iterations = 0;
    bool converged = false;
};

/// Central-difference Jacobian of `f` at `x`.
template <class F>
Eigen::MatrixXd fd_jacobian(F& f, const Vector& x, double h) {
    const Vector f0 = f(x);
    Eigen::MatrixXd J(f0.size(), x.size());
    Vector xp = x;
    for (Index j = 0; j < x.size(); ++j) {
        const double xj = x(j);
        xp(j) = xj + h;
        const Vector fp = f(xp);
        xp(j) = xj - h;
        const Vector fm = f(xp);
        xp(j) = xj;
        J.col(j) = (fp - fm) / (2.0 * h);
    }
    return J;
}

/// Solves f(x) = 0 from x0. Steps are halved until the residual norm drops;
/// if no halving helps the full step is taken anyway so the iteration can
/// leave shallow basins.
template <class F>
NewtonResult newton_solve(F&& f, Vector x0, const NewtonOptions& opt = {}) {
    NewtonResult r;
    r.x = std::move(x0);
    r.residual = f(r.x);
    double norm = r.residual.lpNorm<Eigen::Infinity>();
    for (r.iterations = 0; r.iterations < opt.max_iter; ++r.iterations) {
        if (!std::isfinite(norm) || r.x.lpNorm<Eigen::Infinity>() > opt.bound) break;
        if (norm <= opt.tolerance) {
            r.converged = true;
            return r;
        }
        const Eigen::MatrixXd J = fd_jacobian(f, r.x, opt.fd_step);
        const Vector step = J.colPivHouseholderQr().solve(-r.residual);
        if (!step.allFinite()) break;

        double alpha = 1.0;
        Vector trial = r.x + step;
        Vector ftrial = f(trial);
        double ntrial = ftrial.lpNorm<Eigen::Infinity>();
        while (!(ntrial < norm) && alpha > 1.0 / 64.0) {
            alpha *= 0.5;
            trial = r.x + alpha * step;
            ftrial = f(trial);
            ntrial = ftrial.lpNorm<Eigen::Infinity>();
        }
        if (!(ntrial < norm)) {
            trial = r.x + step;
            ftrial = f(trial);
            ntrial = ftrial.lpNorm<Eigen::Infinity>();
        }
        if (step.lpNorm<Eigen::Infinity>() * alpha < 1e-17 && !(ntrial < norm)) break;
        r.x = std::move(trial);
        r.residual = std::move(ftrial);
        norm = ntrial;
    }
    r.converged = std::isfinite(norm) && norm <= opt.tolerance;
    return r;
}

}  // namespace udisc
