#pragma once

// Oracle problems shared by the solver unit tests and the acceptance suite.
// Everything here is independent of the solver implementation path.

#include <Eigen/Dense>
#include <limits>

#include "iptm/nlp.hpp"

namespace iptm_test {

using Eigen::MatrixXd;
using Eigen::VectorXd;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// min ||z - c||^2 over a box.
class QuadraticProblem : public iptm::NlpBase {
  public:
    QuadraticProblem(VectorXd center, VectorXd lb, VectorXd ub)
        : c_(std::move(center)), lb_(std::move(lb)), ub_(std::move(ub)) {}
    int num_vars() const override { return static_cast<int>(c_.size()); }
    int num_eq() const override { return 0; }
    int num_ineq() const override { return 0; }
    const VectorXd& lower_bounds() const override { return lb_; }
    const VectorXd& upper_bounds() const override { return ub_; }
    double objective(const VectorXd& z) const override { return (z - c_).squaredNorm(); }
    void objective_grad(const VectorXd& z, VectorXd& g) const override { g = 2.0 * (z - c_); }
    void eq_residuals(const VectorXd&, VectorXd& c) const override { c.resize(0); }
    void ineq_residuals(const VectorXd&, VectorXd& g) const override { g.resize(0); }
    void eq_jacobian(const VectorXd&, MatrixXd& j) const override { j.resize(0, num_vars()); }
    void ineq_jacobian(const VectorXd&, MatrixXd& j) const override { j.resize(0, num_vars()); }

  private:
    VectorXd c_, lb_, ub_;
};

/// min z1^2 + z2^2 subject to z1 + z2 = 1. Optimum (0.5, 0.5), multiplier -1.
class EqualityQp : public iptm::NlpBase {
  public:
    EqualityQp() {
        lb_ = VectorXd::Constant(2, -kInf);
        ub_ = VectorXd::Constant(2, kInf);
    }
    int num_vars() const override { return 2; }
    int num_eq() const override { return 1; }
    int num_ineq() const override { return 0; }
    const VectorXd& lower_bounds() const override { return lb_; }
    const VectorXd& upper_bounds() const override { return ub_; }
    double objective(const VectorXd& z) const override { return z.squaredNorm(); }
    void objective_grad(const VectorXd& z, VectorXd& g) const override { g = 2.0 * z; }
    void eq_residuals(const VectorXd& z, VectorXd& c) const override {
        c.resize(1);
        c[0] = z[0] + z[1] - 1.0;
    }
    void ineq_residuals(const VectorXd&, VectorXd& g) const override { g.resize(0); }
    void eq_jacobian(const VectorXd&, MatrixXd& j) const override {
        j.resize(1, 2);
        j << 1.0, 1.0;
    }
    void ineq_jacobian(const VectorXd&, MatrixXd& j) const override { j.resize(0, 2); }

  private:
    VectorXd lb_, ub_;
};

/// Discrete-time double integrator, minimum control energy, fixed endpoints
/// (0,0) -> (1,0). Supplies an independent KKT-linear-system oracle for the
/// optimal objective.
class DoubleIntegratorOcp : public iptm::NlpBase {
  public:
    explicit DoubleIntegratorOcp(int n_steps, double dt = 1.0) : n_(n_steps), dt_(dt) {
        dim_ = n_ + 2 * (n_ + 1);
        me_ = 2 * n_ + 4;
        lb_ = VectorXd::Constant(dim_, -kInf);
        ub_ = VectorXd::Constant(dim_, kInf);
    }
    int num_vars() const override { return dim_; }
    int num_eq() const override { return me_; }
    int num_ineq() const override { return 0; }
    const VectorXd& lower_bounds() const override { return lb_; }
    const VectorXd& upper_bounds() const override { return ub_; }

    int u(int k) const { return k; }
    int pos(int k) const { return n_ + 2 * k; }
    int vel(int k) const { return n_ + 2 * k + 1; }

    double objective(const VectorXd& z) const override {
        double s = 0.0;
        for (int k = 0; k < n_; ++k) s += z[u(k)] * z[u(k)];
        return s;
    }
    void objective_grad(const VectorXd& z, VectorXd& g) const override {
        g.setZero(dim_);
        for (int k = 0; k < n_; ++k) g[u(k)] = 2.0 * z[u(k)];
    }
    void eq_residuals(const VectorXd& z, VectorXd& c) const override {
        c.resize(me_);
        for (int k = 0; k < n_; ++k) {
            c[2 * k] = z[pos(k + 1)] - z[pos(k)] - dt_ * z[vel(k)] - 0.5 * dt_ * dt_ * z[u(k)];
            c[2 * k + 1] = z[vel(k + 1)] - z[vel(k)] - dt_ * z[u(k)];
        }
        c[2 * n_ + 0] = z[pos(0)];
        c[2 * n_ + 1] = z[vel(0)];
        c[2 * n_ + 2] = z[pos(n_)] - 1.0;
        c[2 * n_ + 3] = z[vel(n_)];
    }
    void ineq_residuals(const VectorXd&, VectorXd& g) const override { g.resize(0); }
    void eq_jacobian(const VectorXd&, MatrixXd& j) const override {
        j.setZero(me_, dim_);
        for (int k = 0; k < n_; ++k) {
            j(2 * k, pos(k + 1)) = 1.0;
            j(2 * k, pos(k)) = -1.0;
            j(2 * k, vel(k)) = -dt_;
            j(2 * k, u(k)) = -0.5 * dt_ * dt_;
            j(2 * k + 1, vel(k + 1)) = 1.0;
            j(2 * k + 1, vel(k)) = -1.0;
            j(2 * k + 1, u(k)) = -dt_;
        }
        j(2 * n_ + 0, pos(0)) = 1.0;
        j(2 * n_ + 1, vel(0)) = 1.0;
        j(2 * n_ + 2, pos(n_)) = 1.0;
        j(2 * n_ + 3, vel(n_)) = 1.0;
    }
    void ineq_jacobian(const VectorXd&, MatrixXd& j) const override { j.resize(0, dim_); }

    /// Solve [H A^T; A 0][z; nu] = [0; b] directly with a dense LU.
    double kkt_objective() const {
        MatrixXd a(me_, dim_);
        eq_jacobian(VectorXd::Zero(dim_), a);
        VectorXd b = VectorXd::Zero(me_);
        b[2 * n_ + 2] = 1.0;
        MatrixXd h = MatrixXd::Zero(dim_, dim_);
        for (int k = 0; k < n_; ++k) h(u(k), u(k)) = 2.0;
        MatrixXd kkt = MatrixXd::Zero(dim_ + me_, dim_ + me_);
        kkt.topLeftCorner(dim_, dim_) = h;
        kkt.topRightCorner(dim_, me_) = a.transpose();
        kkt.bottomLeftCorner(me_, dim_) = a;
        VectorXd rhs = VectorXd::Zero(dim_ + me_);
        rhs.tail(me_) = b;
        VectorXd sol = kkt.fullPivLu().solve(rhs);
        double obj = 0.0;
        for (int k = 0; k < n_; ++k) obj += sol[u(k)] * sol[u(k)];
        return obj;
    }

  private:
    int n_, dim_, me_;
    double dt_;
    VectorXd lb_, ub_;
};

}  // namespace iptm_test
