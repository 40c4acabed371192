#include <catch2/catch_amalgamated.hpp>
#include <Eigen/Dense>

#include "iptm/solver.hpp"
#include "iptm/transcription.hpp"
#include "iptm/warm_start.hpp"

using namespace iptm;
using Catch::Approx;
using Eigen::MatrixXd;
using Eigen::VectorXd;

#include "support.hpp"

using namespace iptm_test;


TEST_CASE("unconstrained quadratic reaches its center") {
    VectorXd c(3);
    c << 1.0, -2.0, 0.5;
    QuadraticProblem p(c, VectorXd::Constant(3, -kInf), VectorXd::Constant(3, kInf));
    solver::SolverOptions opts;
    auto sol = solver::solve(p, VectorXd::Zero(3), opts);
    CHECK(sol.status == solver::SolveStatus::Converged);
    CHECK((sol.z - c).lpNorm<Eigen::Infinity>() < opts.kkt_tol);
}

TEST_CASE("box-constrained quadratic projects onto the box") {
    VectorXd c(2);
    c << 5.0, -5.0;
    VectorXd lb(2), ub(2);
    lb << 0.0, -1.0;
    ub << 1.0, 1.0;
    QuadraticProblem p(c, lb, ub);
    solver::SolverOptions opts;
    auto sol = solver::solve(p, VectorXd::Zero(2), opts);
    CHECK(sol.status == solver::SolveStatus::Converged);
    CHECK(sol.z[0] == Approx(1.0));
    CHECK(sol.z[1] == Approx(-1.0));
    // solver never leaves the box, whatever the status
    CHECK((sol.z.array() >= lb.array() - 1e-15).all());
    CHECK((sol.z.array() <= ub.array() + 1e-15).all());
}

TEST_CASE("equality QP recovers (0.5, 0.5) with multiplier -1") {
    EqualityQp p;
    solver::SolverOptions opts;
    VectorXd z0(2);
    z0 << 3.0, -2.0;
    auto sol = solver::solve(p, z0, opts);
    CHECK(sol.status == solver::SolveStatus::Converged);
    CHECK(sol.z[0] == Approx(0.5).margin(1e-6));
    CHECK(sol.z[1] == Approx(0.5).margin(1e-6));
    CHECK(sol.lambda_eq[0] == Approx(-1.0).margin(1e-6));
    CHECK(sol.objective == Approx(0.5).margin(1e-6));

    auto kkt = solver::check_kkt(p, sol.z, sol.lambda_eq, sol.mu_ineq, opts);
    CHECK(kkt.stationarity < 1e-4);
    CHECK(kkt.eq_feas < 1e-5);
}

TEST_CASE("check_kkt at the analytic optimum and at infeasible points") {
    EqualityQp p;
    solver::SolverOptions opts;
    VectorXd z(2);
    z << 0.5, 0.5;
    VectorXd lambda(1);
    lambda << -1.0;
    auto kkt = solver::check_kkt(p, z, lambda, VectorXd(0), opts);
    CHECK(kkt.stationarity < 1e-8);
    CHECK(kkt.eq_feas < 1e-8);

    VectorXd bad(2);
    bad << 2.0, 1.0;
    auto kkt2 = solver::check_kkt(p, bad, VectorXd::Zero(1), VectorXd(0), opts);
    CHECK(kkt2.eq_feas == Approx(2.0));  // |2 + 1 - 1|

    // zero multipliers at an interior unconstrained optimum
    VectorXd c(2);
    c << 0.3, -0.7;
    QuadraticProblem q(c, VectorXd::Constant(2, -kInf), VectorXd::Constant(2, kInf));
    auto kkt3 = solver::check_kkt(q, c, VectorXd(0), VectorXd(0), opts);
    CHECK(kkt3.stationarity < 1e-12);

    CHECK_THROWS_AS(solver::check_kkt(p, z, VectorXd::Zero(3), VectorXd(0), opts),
                    DimensionMismatch);
}

TEST_CASE("double integrator family matches the KKT oracle") {
    for (int n : {5, 10, 20, 40}) {
        DoubleIntegratorOcp p(n);
        double oracle = p.kkt_objective();
        solver::SolverOptions opts;
        opts.kkt_tol = 1e-5;
        opts.feas_tol = 1e-8;
        opts.max_outer_iters = 80;
        auto sol = solver::solve(p, VectorXd::Zero(p.num_vars()), opts);
        INFO("N = " << n << " status " << solver::status_name(sol.status));
        CHECK(sol.status == solver::SolveStatus::Converged);
        CHECK(std::abs(sol.objective - oracle) / std::max(1e-12, oracle) < 1e-6);
    }
}

TEST_CASE("solve is deterministic bit for bit") {
    DoubleIntegratorOcp p(10);
    solver::SolverOptions opts;
    auto a = solver::solve(p, VectorXd::Zero(p.num_vars()), opts);
    auto b = solver::solve(p, VectorXd::Zero(p.num_vars()), opts);
    REQUIRE(a.z.size() == b.z.size());
    for (int i = 0; i < a.z.size(); ++i) CHECK(a.z[i] == b.z[i]);
    CHECK(a.objective == b.objective);
    CHECK(a.outer_iters == b.outer_iters);
    CHECK(a.inner_iters == b.inner_iters);
}

TEST_CASE("outer progress is monotone or the penalty grows") {
    DoubleIntegratorOcp p(20);
    solver::SolverOptions opts;
    auto sol = solver::solve(p, VectorXd::Zero(p.num_vars()), opts);
    REQUIRE(sol.history.size() >= 2);
    for (size_t k = 1; k < sol.history.size(); ++k) {
        bool improved = sol.history[k].feasibility <= sol.history[k - 1].feasibility + 1e-12;
        bool penalty_grew = sol.history[k].penalty > sol.history[k - 1].penalty;
        CHECK((improved || penalty_grew));
    }
}

TEST_CASE("infeasible problem is reported") {
    // z in [0,1] with equality z = 3: unsatisfiable inside the box
    class Infeas : public NlpBase {
      public:
        Infeas() {
            lb_ = VectorXd::Zero(1);
            ub_ = VectorXd::Ones(1);
        }
        int num_vars() const override { return 1; }
        int num_eq() const override { return 1; }
        int num_ineq() const override { return 0; }
        const VectorXd& lower_bounds() const override { return lb_; }
        const VectorXd& upper_bounds() const override { return ub_; }
        double objective(const VectorXd& z) const override { return z[0] * z[0]; }
        void objective_grad(const VectorXd& z, VectorXd& g) const override { g = 2.0 * z; }
        void eq_residuals(const VectorXd& z, VectorXd& c) const override {
            c.resize(1);
            c[0] = z[0] - 3.0;
        }
        void ineq_residuals(const VectorXd&, VectorXd& g) const override { g.resize(0); }
        void eq_jacobian(const VectorXd&, MatrixXd& j) const override {
            j.resize(1, 1);
            j(0, 0) = 1.0;
        }
        void ineq_jacobian(const VectorXd&, MatrixXd& j) const override { j.resize(0, 1); }

      private:
        VectorXd lb_, ub_;
    };
    Infeas p;
    solver::SolverOptions opts;
    opts.max_outer_iters = 60;
    auto sol = solver::solve(p, VectorXd::Zero(1), opts);
    CHECK(sol.status == solver::SolveStatus::Infeasible);
    CHECK(sol.z[0] <= 1.0 + 1e-15);  // stays in the box regardless
}

TEST_CASE("warm start shifts driving samples and re-rolls states") {
    using namespace iptm::transcription;
    ProblemParams pp;
    pp.vehicle.battery = {360.0, 0.4, 864000.0, 500.0, 1000.0, 15.0};
    pp.vehicle.cabin = {40.0, 1000.0, 180.0, 600.0, 250.0, 100.0, 2};
    pp.vehicle.cooling = {2.0, 12000.0, 9960.0, 9960.0};
    pp.vehicle.ambient_temp = 38.0;
    pp.vehicle.p_aux_base = 500.0;

    HorizonSpec old_spec;
    old_spec.n1 = 3;
    old_spec.dt1 = 30.0;
    old_spec.n2 = 4;
    old_spec.traction_preview = {11000.0, 12000.0, 13000.0};
    NlpProblem old_p(old_spec, {0.35, 30.0, 24.0, 0.0}, pp, Weights{});

    solver::Solution prev;
    // coolers off, modest charge: states roll away from every box bound, so
    // the re-rolled warm start stays defect-consistent after clamping
    prev.z = Eigen::VectorXd::Zero(old_p.num_vars());
    for (int i = 0; i < 4; ++i) {
        prev.z[old_p.layout().p_chg + i] = 20000.0;
        prev.z[old_p.layout().dt2 + i] = 60.0;
    }
    prev.z[old_p.layout().q_bat + 1] = 1234.0;  // marker in the 2nd driving sample
    prev.z = old_p.rollout_states(prev.z);

    SECTION("identical spec and state returns the vector unchanged") {
        NlpProblem same(old_spec, {0.35, 30.0, 24.0, 0.0}, pp, Weights{});
        Eigen::VectorXd z = solver::warm_start(prev, old_p, same);
        CHECK(z == prev.z);
    }

    SECTION("one-sample shift drops the first driving sample") {
        HorizonSpec new_spec = old_spec;
        new_spec.n1 = 2;
        new_spec.traction_preview = {12000.0, 13000.0};
        NlpProblem new_p(new_spec, {0.349, 30.2, 24.1, 30.0}, pp, Weights{});
        Eigen::VectorXd z = solver::warm_start(prev, old_p, new_p);
        REQUIRE(z.size() == new_p.num_vars());
        CHECK(z[new_p.layout().q_bat + 0] == 1234.0);
        // states re-rolled: defects vanish
        Eigen::VectorXd c = new_p.eq_residuals(z);
        for (int i = 0; i < 3 * new_p.layout().n_samples; ++i) CHECK(std::abs(c[i]) < 1e-9);
        // dt2 entries preserved
        for (int i = 0; i < 4; ++i)
            CHECK(z[new_p.layout().dt2 + i] == prev.z[old_p.layout().dt2 + i]);
    }

    SECTION("incompatible horizons raise DimensionMismatch") {
        HorizonSpec nc = old_spec;
        nc.charging_in_horizon = false;
        NlpProblem new_p(nc, {0.35, 30.0, 24.0, 0.0}, pp, Weights{});
        CHECK_THROWS_AS(solver::warm_start(prev, old_p, new_p), DimensionMismatch);
    }
}
