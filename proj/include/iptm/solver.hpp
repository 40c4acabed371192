#pragma once

// Self-contained constrained NLP solver: augmented-Lagrangian outer loop
// (equalities and inequalities in PHR form) around a projected limited-
// memory quasi-Newton inner minimizer over the box bounds. Deterministic:
// no randomized components anywhere.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "iptm/nlp.hpp"
#include "iptm/types.hpp"

namespace iptm::solver {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct SolverOptions {
    double kkt_tol = 1e-4;        // projected-gradient stationarity, scaled space
    double feas_tol = 1e-5;       // per-constraint scaled feasibility
    int max_outer_iters = 60;
    int max_inner_iters = 800;    // per outer iteration
    double initial_penalty = 10.0;
    double penalty_growth_factor = 10.0;
    double penalty_cap = 1e10;
    double inner_grad_tol = 1e-7;  // floor for the inner tolerance schedule
    int lbfgs_memory = 12;
    std::ostream* trace = nullptr;  // optional NDJSON per-outer-iteration log

    void validate() const {
        if (kkt_tol <= 0 || feas_tol <= 0 || inner_grad_tol <= 0)
            throw ValidationError("solver: tolerances must be positive");
        if (penalty_growth_factor <= 1.0)
            throw ValidationError("solver: penalty growth factor must be > 1");
    }
};

enum class SolveStatus { Converged, MaxIterations, Infeasible, EvaluationError };

inline const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::MaxIterations: return "max_iterations";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::EvaluationError: return "evaluation_error";
    }
    return "?";
}

struct KktResiduals {
    double stationarity = std::numeric_limits<double>::infinity();
    double eq_feas = 0.0;
    double ineq_feas = 0.0;
    double complementarity = 0.0;
};

struct OuterRecord {
    int iter = 0;
    double objective = 0.0;
    double feasibility = 0.0;
    double stationarity = 0.0;
    double penalty = 0.0;
};

struct Solution {
    VectorXd z;          // unscaled, inside the box bounds
    VectorXd lambda_eq;  // equality multipliers, unscaled problem
    VectorXd mu_ineq;    // inequality multipliers (>= 0), unscaled problem
    SolveStatus status = SolveStatus::MaxIterations;
    KktResiduals kkt;
    int outer_iters = 0;
    long inner_iters = 0;
    double wall_time_s = 0.0;
    double objective = 0.0;
    std::vector<OuterRecord> history;  // one entry per outer iteration
};

namespace detail {

/// Scaled view of an NlpBase: variables divided by var_scale, residuals by
/// their constraint scales, objective by a fixed magnitude.
struct ScaledProblem {
    const NlpBase& p;
    VectorXd xs;       // variable scales
    VectorXd cs, gs;   // constraint scales
    double fs = 1.0;   // objective scale
    VectorXd lb, ub;   // scaled bounds

    explicit ScaledProblem(const NlpBase& prob) : p(prob) {
        xs = prob.var_scale();
        cs = prob.eq_scale();
        gs = prob.ineq_scale();
        lb = prob.lower_bounds().cwiseQuotient(xs);
        ub = prob.upper_bounds().cwiseQuotient(xs);
    }

    VectorXd unscale(const VectorXd& zh) const { return zh.cwiseProduct(xs); }
    VectorXd scale(const VectorXd& z) const { return z.cwiseQuotient(xs); }

    double objective(const VectorXd& zh) const { return p.objective(unscale(zh)) / fs; }

    void values(const VectorXd& zh, double& f, VectorXd& c, VectorXd& g) const {
        VectorXd z = unscale(zh);
        f = p.objective(z) / fs;
        p.eq_residuals(z, c);
        c.array() /= cs.array();
        p.ineq_residuals(z, g);
        g.array() /= gs.array();
    }

    void derivatives(const VectorXd& zh, VectorXd& fgrad, MatrixXd& jc, MatrixXd& jg) const {
        VectorXd z = unscale(zh);
        p.objective_grad(z, fgrad);
        fgrad = fgrad.cwiseProduct(xs) / fs;
        p.eq_jacobian(z, jc);
        p.ineq_jacobian(z, jg);
        for (int r = 0; r < jc.rows(); ++r) jc.row(r) = jc.row(r).cwiseProduct(xs.transpose()) / cs[r];
        for (int r = 0; r < jg.rows(); ++r) jg.row(r) = jg.row(r).cwiseProduct(xs.transpose()) / gs[r];
    }
};

inline VectorXd project(const VectorXd& z, const VectorXd& lb, const VectorXd& ub) {
    return z.cwiseMax(lb).cwiseMin(ub);
}

/// Two-loop L-BFGS recursion over stored (s, y) pairs.
class LbfgsMemory {
  public:
    explicit LbfgsMemory(int capacity) : capacity_(capacity) {}

    void clear() { pairs_.clear(); }

    void push(const VectorXd& s, const VectorXd& y) {
        double sy = s.dot(y);
        if (!(sy > 1e-12 * s.norm() * y.norm())) return;  // skip non-curvature pairs
        pairs_.push_back({s, y, sy});
        if (static_cast<int>(pairs_.size()) > capacity_) pairs_.pop_front();
    }

    VectorXd apply(const VectorXd& grad) const {
        VectorXd q = grad;
        std::vector<double> alpha(pairs_.size());
        for (int i = static_cast<int>(pairs_.size()) - 1; i >= 0; --i) {
            alpha[i] = pairs_[i].s.dot(q) / pairs_[i].sy;
            q -= alpha[i] * pairs_[i].y;
        }
        if (!pairs_.empty()) {
            const auto& last = pairs_.back();
            q *= last.sy / last.y.squaredNorm();
        }
        for (size_t i = 0; i < pairs_.size(); ++i) {
            double beta = pairs_[i].y.dot(q) / pairs_[i].sy;
            q += (alpha[i] - beta) * pairs_[i].s;
        }
        return q;
    }

    bool empty() const { return pairs_.empty(); }

  private:
    struct Pair {
        VectorXd s, y;
        double sy;
    };
    int capacity_;
    std::deque<Pair> pairs_;
};

}  // namespace detail

/// KKT residual norms in the scaled space used by solve()'s convergence
/// test. Pure function of (problem, point, multipliers).
inline KktResiduals check_kkt(const NlpBase& prob, const VectorXd& z, const VectorXd& lambda_eq,
                              const VectorXd& mu_ineq, const SolverOptions& opts) {
    (void)opts;
    detail::ScaledProblem sp(prob);
    if (lambda_eq.size() != prob.num_eq() || mu_ineq.size() != prob.num_ineq())
        throw DimensionMismatch("check_kkt: multiplier dimensions do not match the problem");
    VectorXd zh = sp.scale(z);
    VectorXd fgrad;
    MatrixXd jc, jg;
    sp.derivatives(zh, fgrad, jc, jg);
    double f;
    VectorXd c, g;
    sp.values(zh, f, c, g);
    // multipliers of the scaled problem
    VectorXd lh = lambda_eq.cwiseProduct(sp.cs) / sp.fs;
    VectorXd mh = mu_ineq.cwiseProduct(sp.gs) / sp.fs;
    VectorXd lagr_grad = fgrad;
    if (c.size() > 0) lagr_grad += jc.transpose() * lh;
    if (g.size() > 0) lagr_grad += jg.transpose() * mh;
    KktResiduals r;
    r.stationarity = (zh - detail::project(zh - lagr_grad, sp.lb, sp.ub)).lpNorm<Eigen::Infinity>();
    r.eq_feas = c.size() ? c.lpNorm<Eigen::Infinity>() : 0.0;
    r.ineq_feas = g.size() ? std::max(0.0, g.maxCoeff()) : 0.0;
    r.complementarity = 0.0;
    for (int j = 0; j < g.size(); ++j)
        r.complementarity = std::max(r.complementarity, std::abs(mh[j] * g[j]));
    return r;
}

/// Augmented-Lagrangian solve. z_init is clipped into the box before the
/// first evaluation; the returned point always satisfies the box exactly.
inline Solution solve(const NlpBase& prob, const VectorXd& z_init, const SolverOptions& opts) {
    opts.validate();
    auto t_start = std::chrono::steady_clock::now();
    Solution sol;
    try {
        detail::ScaledProblem sp(prob);
        const int n = prob.num_vars();
        const int me = prob.num_eq();
        const int mi = prob.num_ineq();
        if (z_init.size() != n)
            throw DimensionMismatch("solve: z_init has dimension " +
                                    std::to_string(z_init.size()) + ", expected " +
                                    std::to_string(n));
        for (int j = 0; j < n; ++j)
            if (sp.lb[j] > sp.ub[j]) throw InfeasibleBounds("solve: empty box at index " +
                                                            std::to_string(j));

        VectorXd zh = detail::project(sp.scale(z_init), sp.lb, sp.ub);
        sp.fs = std::max(1.0, std::abs(sp.p.objective(sp.unscale(zh))));

        VectorXd lambda = VectorXd::Zero(me);
        VectorXd mu = VectorXd::Zero(mi);
        double rho = opts.initial_penalty;
        double omega = 1e-2;  // inner stationarity target, tightened outward
        double best_feas = std::numeric_limits<double>::infinity();

        VectorXd c, g, fgrad;
        MatrixXd jc, jg;

        auto al_value = [&](const VectorXd& point, double& f_out, VectorXd& c_out,
                            VectorXd& g_out) -> double {
            sp.values(point, f_out, c_out, g_out);
            double val = f_out;
            if (me > 0) val += lambda.dot(c_out) + 0.5 * rho * c_out.squaredNorm();
            for (int j = 0; j < mi; ++j) {
                double t = mu[j] + rho * g_out[j];
                if (t > 0.0) val += (t * t - mu[j] * mu[j]) / (2.0 * rho);
                else val -= mu[j] * mu[j] / (2.0 * rho);
            }
            return val;
        };
        auto al_grad = [&](const VectorXd& point, const VectorXd& c_in, const VectorXd& g_in,
                           VectorXd& grad_out) {
            sp.derivatives(point, fgrad, jc, jg);
            grad_out = fgrad;
            if (me > 0) grad_out += jc.transpose() * (lambda + rho * c_in);
            if (mi > 0) grad_out += jg.transpose() * (mu + rho * g_in).cwiseMax(0.0);
        };

        // L-BFGS memory persists across multiplier updates (the augmented
        // Hessian only changes when the penalty changes)
        detail::LbfgsMemory mem(std::max(opts.lbfgs_memory, std::min(n, 40)));
        int stall_count = 0;
        for (int outer = 0; outer < opts.max_outer_iters; ++outer) {
            double f_raw;
            double phi = al_value(zh, f_raw, c, g);
            VectorXd grad;
            al_grad(zh, c, g, grad);
            double pg_norm = std::numeric_limits<double>::infinity();
            bool stalled = false;

            for (int inner = 0; inner < opts.max_inner_iters; ++inner) {
                VectorXd pg = zh - detail::project(zh - grad, sp.lb, sp.ub);
                pg_norm = pg.lpNorm<Eigen::Infinity>();
                if (pg_norm <= omega) break;

                VectorXd d = mem.empty() ? VectorXd(-grad) : VectorXd(-mem.apply(grad));
                if (grad.dot(d) > -1e-16 * (1.0 + std::abs(phi))) {
                    d = -grad;
                    mem.clear();
                }
                double step = 1.0;
                double phi_new = phi;
                VectorXd z_new = zh;
                VectorXd c_new = c, g_new = g;
                double f_new = f_raw;
                bool accepted = false;
                for (int ls = 0; ls < 50; ++ls) {
                    VectorXd cand = detail::project(zh + step * d, sp.lb, sp.ub);
                    VectorXd dz = cand - zh;
                    if (dz.lpNorm<Eigen::Infinity>() < 1e-18) break;
                    double slope = grad.dot(dz);
                    double val;
                    double f_tmp;
                    VectorXd c_tmp, g_tmp;
                    bool eval_ok = true;
                    try {
                        val = al_value(cand, f_tmp, c_tmp, g_tmp);
                    } catch (const DiscriminantNegative&) {
                        eval_ok = false;
                        val = std::numeric_limits<double>::infinity();
                    }
                    // Armijo when the slope is meaningful; plain decrease
                    // once the directional derivative is roundoff-flat
                    bool ok = eval_ok && std::isfinite(val) &&
                              (slope < -1e-15 * (1.0 + std::abs(phi))
                                   ? val <= phi + 1e-4 * slope
                                   : val < phi);
                    if (ok) {
                        z_new = cand;
                        phi_new = val;
                        c_new = c_tmp;
                        g_new = g_tmp;
                        f_new = f_tmp;
                        accepted = true;
                        break;
                    }
                    step *= 0.5;
                }
                sol.inner_iters++;
                if (!accepted) {
                    stalled = true;
                    break;
                }
                VectorXd grad_new;
                al_grad(z_new, c_new, g_new, grad_new);
                mem.push(z_new - zh, grad_new - grad);
                // relative objective change below 1e-12 counts as a stall
                bool flat = std::abs(phi - phi_new) <= 1e-12 * std::max(1e-8, std::abs(phi));
                zh = z_new;
                phi = phi_new;
                c = c_new;
                g = g_new;
                f_raw = f_new;
                grad = grad_new;
                if (flat) {
                    stalled = true;
                    break;
                }
            }

            double eq_feas = me ? c.lpNorm<Eigen::Infinity>() : 0.0;
            double ineq_feas = mi ? std::max(0.0, g.maxCoeff()) : 0.0;
            double feas = std::max(eq_feas, ineq_feas);
            VectorXd pg = zh - detail::project(zh - grad, sp.lb, sp.ub);
            pg_norm = pg.lpNorm<Eigen::Infinity>();
            sol.outer_iters = outer + 1;
            sol.history.push_back({outer, f_raw * sp.fs, feas, pg_norm, rho});
            if (opts.trace) {
                *opts.trace << "{\"iter\":" << outer << ",\"objective\":" << f_raw * sp.fs
                            << ",\"eq_feas\":" << eq_feas << ",\"ineq_feas\":" << ineq_feas
                            << ",\"stationarity\":" << pg_norm << ",\"penalty\":" << rho
                            << "}\n";
            }

            if (feas <= opts.feas_tol && pg_norm <= opts.kkt_tol) {
                // first-order multiplier estimates at the solution
                lambda += rho * c;
                mu = (mu + rho * g).cwiseMax(0.0);
                sol.status = SolveStatus::Converged;
                break;
            }

            if (feas <= std::max(opts.feas_tol, 0.33 * best_feas)) {
                lambda += rho * c;
                mu = (mu + rho * g).cwiseMax(0.0);
                if (feas < 0.1 * best_feas) stall_count = 0;  // real progress
                best_feas = std::min(best_feas, feas);
                omega = std::max(opts.inner_grad_tol, omega * 0.2);
            } else {
                rho *= opts.penalty_growth_factor;
                mem.clear();  // curvature changed
                omega = std::max(opts.inner_grad_tol, omega * 0.5);
                if (rho > opts.penalty_cap) {
                    sol.status = feas > 10.0 * opts.feas_tol ? SolveStatus::Infeasible
                                                             : SolveStatus::MaxIterations;
                    break;
                }
            }
            if (stalled) {
                // accept the iterate and retry a few times; grow the penalty
                // only while feasibility is the open problem
                if (++stall_count > 4) {
                    sol.status = SolveStatus::MaxIterations;
                    break;
                }
                if (feas > opts.feas_tol) {
                    rho *= opts.penalty_growth_factor;
                    mem.clear();
                } else {
                    lambda += rho * c;
                    mu = (mu + rho * g).cwiseMax(0.0);
                }
            }
        }

        sol.z = detail::project(zh, sp.lb, sp.ub).cwiseProduct(sp.xs);
        sol.lambda_eq = lambda.cwiseQuotient(sp.cs) * sp.fs;
        sol.mu_ineq = mu.cwiseQuotient(sp.gs) * sp.fs;
        sol.objective = prob.objective(sol.z);
        sol.kkt = check_kkt(prob, sol.z, sol.lambda_eq, sol.mu_ineq, opts);
    } catch (const DiscriminantNegative&) {
        sol.status = SolveStatus::EvaluationError;
    }
    sol.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return sol;
}

}  // namespace iptm::solver
