#pragma once

// Central finite-difference verification of the analytic derivatives on a
// small fixed horizon. Used by the `check-gradients` CLI command and the
// acceptance suite.

#include <Eigen/Dense>
#include <random>
#include <string>

#include "iptm/transcription.hpp"

namespace iptm::gradcheck {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Report {
    double max_rel_error = 0.0;
    std::string worst_component;
    int points_checked = 0;
};

inline transcription::NlpProblem small_problem(int n1 = 3, int n2 = 4) {
    transcription::HorizonSpec spec;
    spec.n1 = n1;
    spec.dt1 = 30.0;
    spec.n2 = n2;
    spec.dt2_max = 180.0;
    spec.traction_preview.assign(n1, 15000.0);
    for (int i = 0; i < n1; ++i) spec.traction_preview[i] = 8000.0 + 4000.0 * i;
    spec.soc_targ = 0.6;
    spec.charging_in_horizon = n2 > 0;

    VehicleState x0{0.35, 30.0, 24.0, 0.0};
    transcription::ProblemParams pp;
    pp.vehicle.battery = {360.0, 0.4, 864000.0, 500.0, 1000.0, 15.0};
    pp.vehicle.cabin = {40.0, 1000.0, 180.0, 600.0, 250.0, 100.0, 2};
    pp.vehicle.cooling = {2.0, 12000.0, 9960.0, 9960.0};
    pp.vehicle.ambient_temp = 38.0;
    pp.vehicle.p_aux_base = 500.0;
    pp.limits = {};
    transcription::Weights w;
    w.alpha = 1e-2;
    w.beta1 = 1e11;
    w.beta2 = 1e10;
    w.budget_t_chg = 1800.0;
    return transcription::NlpProblem(spec, x0, pp, w);
}

/// Draw a random point inside the box (a finite surrogate range is used
/// where a bound is infinite).
inline VectorXd random_feasible_point(const transcription::NlpProblem& p, std::mt19937& rng) {
    const VectorXd& lb = p.lower_bounds();
    const VectorXd& ub = p.upper_bounds();
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    VectorXd z(p.num_vars());
    const auto& L = p.layout();
    for (int j = 0; j < p.num_vars(); ++j) {
        double lo = lb[j], hi = ub[j];
        if (!std::isfinite(lo)) lo = -1.0;
        if (!std::isfinite(hi)) {
            if (j >= L.t_bat && j < L.eps1) hi = lo + 25.0;  // temperature knots
            else hi = lo + 2.0;                              // slacks
        }
        z[j] = lo + (hi - lo) * uni(rng);
    }
    return z;
}

/// Max elementwise relative error between analytic derivatives and central
/// finite differences at `points` random box-feasible points.
inline Report run(int points, unsigned seed, bool perturb_hook = false, int n1 = 3, int n2 = 4) {
    transcription::NlpProblem p = small_problem(n1, n2);
    std::mt19937 rng(seed);
    Report rep;
    rep.points_checked = points;

    const int n = p.num_vars();
    const int me = p.num_eq();
    const int mi = p.num_ineq();

    // step h = 1e-6 relative to each variable's characteristic range
    VectorXd fd_scale(n);
    for (int j = 0; j < n; ++j) {
        double lo = p.lower_bounds()[j], hi = p.upper_bounds()[j];
        fd_scale[j] = (std::isfinite(lo) && std::isfinite(hi) && hi > lo) ? hi - lo : 1.0;
    }

    for (int pt = 0; pt < points; ++pt) {
        VectorXd z = random_feasible_point(p, rng);
        VectorXd fgrad = p.objective_grad(z);
        if (perturb_hook && n > 0) fgrad[0] += 1e-3 * (1.0 + std::abs(fgrad[0]));
        MatrixXd jc = p.eq_jacobian(z);
        MatrixXd jg = p.ineq_jacobian(z);

        for (int j = 0; j < n; ++j) {
            double h = 1e-6 * std::max({1.0, std::abs(z[j]), fd_scale[j]});
            VectorXd zp = z, zm = z;
            zp[j] += h;
            zm[j] -= h;
            double denom = 2.0 * h;

            double fd_obj = (p.objective(zp) - p.objective(zm)) / denom;
            VectorXd fd_c = (p.eq_residuals(zp) - p.eq_residuals(zm)) / denom;
            VectorXd fd_g = (p.ineq_residuals(zp) - p.ineq_residuals(zm)) / denom;

            auto update = [&](double analytic, double fd, const std::string& what) {
                double err = std::abs(analytic - fd) / std::max({1.0, std::abs(analytic), std::abs(fd)});
                if (err > rep.max_rel_error) {
                    rep.max_rel_error = err;
                    rep.worst_component = what + " wrt z[" + std::to_string(j) + "]";
                }
            };
            update(fgrad[j], fd_obj, "objective");
            for (int r = 0; r < me; ++r) update(jc(r, j), fd_c[r], "eq[" + std::to_string(r) + "]");
            for (int r = 0; r < mi; ++r) update(jg(r, j), fd_g[r], "ineq[" + std::to_string(r) + "]");
        }
    }
    return rep;
}

}  // namespace iptm::gradcheck
