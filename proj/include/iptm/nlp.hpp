#pragma once

// Abstract interface between problem builders and the solver: smooth
// objective, equality residuals c(z)=0, inequality residuals g(z)<=0 and
// box bounds, with dense first derivatives.

#include <Eigen/Dense>

namespace iptm {

class NlpBase {
  public:
    virtual ~NlpBase() = default;

    virtual int num_vars() const = 0;
    virtual int num_eq() const = 0;
    virtual int num_ineq() const = 0;

    virtual const Eigen::VectorXd& lower_bounds() const = 0;
    virtual const Eigen::VectorXd& upper_bounds() const = 0;

    /// Per-variable magnitudes used by the solver to work in O(1) space.
    virtual Eigen::VectorXd var_scale() const { return Eigen::VectorXd::Ones(num_vars()); }
    /// Per-constraint magnitudes; residuals are judged after division.
    virtual Eigen::VectorXd eq_scale() const { return Eigen::VectorXd::Ones(num_eq()); }
    virtual Eigen::VectorXd ineq_scale() const { return Eigen::VectorXd::Ones(num_ineq()); }

    virtual double objective(const Eigen::VectorXd& z) const = 0;
    virtual void objective_grad(const Eigen::VectorXd& z, Eigen::VectorXd& grad) const = 0;
    virtual void eq_residuals(const Eigen::VectorXd& z, Eigen::VectorXd& c) const = 0;
    virtual void ineq_residuals(const Eigen::VectorXd& z, Eigen::VectorXd& g) const = 0;
    /// Jacobians are dense, row = constraint. Implementations must resize.
    virtual void eq_jacobian(const Eigen::VectorXd& z, Eigen::MatrixXd& jac) const = 0;
    virtual void ineq_jacobian(const Eigen::VectorXd& z, Eigen::MatrixXd& jac) const = 0;

    // Allocating conveniences (tests, diagnostics).
    Eigen::VectorXd eq_residuals(const Eigen::VectorXd& z) const {
        Eigen::VectorXd c;
        eq_residuals(z, c);
        return c;
    }
    Eigen::VectorXd ineq_residuals(const Eigen::VectorXd& z) const {
        Eigen::VectorXd g;
        ineq_residuals(z, g);
        return g;
    }
    Eigen::VectorXd objective_grad(const Eigen::VectorXd& z) const {
        Eigen::VectorXd grad;
        objective_grad(z, grad);
        return grad;
    }
    Eigen::MatrixXd eq_jacobian(const Eigen::VectorXd& z) const {
        Eigen::MatrixXd j;
        eq_jacobian(z, j);
        return j;
    }
    Eigen::MatrixXd ineq_jacobian(const Eigen::VectorXd& z) const {
        Eigen::MatrixXd j;
        ineq_jacobian(z, j);
        return j;
    }
};

}  // namespace iptm
