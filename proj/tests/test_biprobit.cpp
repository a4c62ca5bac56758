#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dualcv/biprobit.hpp"
#include "dualcv/bvn.hpp"
#include "dualcv/errors.hpp"
#include "dualcv/probit.hpp"
#include "oracles.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace {

struct Sim {
    Eigen::MatrixXd X1, X2;
    Eigen::VectorXd y1, y2;
};

// Recursive system: y1 feeds eq2, errors correlated rho.
Sim make_data(int n, double rho, double eta, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Sim s;
    s.X1.resize(n, 2);
    s.X2.resize(n, 3);
    s.y1.resize(n);
    s.y2.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x1 = z(gen), x2 = z(gen);
        const double e1 = z(gen);
        const double e2 = rho * e1 + std::sqrt(1.0 - rho * rho) * z(gen);
        const double y1 = (0.3 + 0.9 * x1 + e1 > 0) ? 1.0 : 0.0;
        const double y2 = (0.4 + eta * y1 + 0.8 * x2 + e2 > 0) ? 1.0 : 0.0;
        s.X1.row(i) << 1.0, x1;
        s.X2.row(i) << 1.0, y1, x2;
        s.y1(i) = y1;
        s.y2(i) = y2;
    }
    return s;
}

Eigen::VectorXd random_params(std::mt19937_64& gen, Eigen::Index dim) {
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    Eigen::VectorXd p(dim);
    for (Eigen::Index j = 0; j < dim; ++j) p(j) = u(gen);
    return p;
}

}  // namespace

TEST_CASE("at athrho 0 the joint loglik factorizes exactly") {
    const Sim s = make_data(60, 0.5, -0.7, 11);
    std::mt19937_64 gen(23);
    for (int rep = 0; rep < 5; ++rep) {
        Eigen::VectorXd p = random_params(gen, 6);
        p(5) = 0.0;  // athrho
        const double joint = dualcv::biprobit_loglik(s.X1, s.y1, s.X2, s.y2, p).first;
        const double l1 = dualcv::probit_loglik(s.X1, s.y1, p.head(2)).first;
        const double l2 = dualcv::probit_loglik(s.X2, s.y2, p.segment(2, 3)).first;
        CHECK(std::abs(joint - (l1 + l2)) <= 1e-12 * std::max(1.0, std::abs(joint)));
    }
}

TEST_CASE("single-record cell probability") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(1, 1);
    Eigen::VectorXd y1(1), y0(1);
    y1 << 1;
    y0 << 0;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(3);  // both indexes 0, athrho 0
    CHECK(dualcv::biprobit_loglik(X, y1, X, y1, p).first ==
          doctest::Approx(std::log(0.25)).epsilon(1e-14));
    CHECK(dualcv::biprobit_loglik(X, y1, X, y0, p).first ==
          doctest::Approx(std::log(0.25)).epsilon(1e-14));
}

TEST_CASE("loglik agrees with the quadrature oracle record by record") {
    const Sim s = make_data(25, 0.6, -0.9, 31);
    std::mt19937_64 gen(5);
    Eigen::VectorXd p = random_params(gen, 6);
    p(5) = 0.45;  // rho = tanh(0.45) ~ 0.42
    const double rho = std::tanh(p(5));
    const Eigen::VectorXd v1 = s.X1 * p.head(2);
    const Eigen::VectorXd v2 = s.X2 * p.segment(2, 3);
    double want = 0.0;
    for (int i = 0; i < 25; ++i) {
        const double q1 = s.y1(i) > 0.5 ? 1.0 : -1.0;
        const double q2 = s.y2(i) > 0.5 ? 1.0 : -1.0;
        // Oracle equivalence on the probability scale, where the quadrature
        // tolerance lives; small cells would amplify it on the log scale.
        const double p_lib =
            dualcv::bvn_cdf(q1 * v1(i), q2 * v2(i), dualcv::Correlation(q1 * q2 * rho));
        const double p_quad = oracle::bvn_cdf_quad(q1 * v1(i), q2 * v2(i), q1 * q2 * rho, 1e-12);
        CHECK(std::abs(p_lib - p_quad) <= 1e-9);
        want += std::log(p_lib);
    }
    const double got = dualcv::biprobit_loglik(s.X1, s.y1, s.X2, s.y2, p).first;
    CHECK(std::abs(got - want) <= 1e-10 * std::max(1.0, std::abs(want)));
}

TEST_CASE("analytic gradient matches finite differences at 20 random points") {
    const Sim s = make_data(40, 0.4, -0.8, 17);
    std::mt19937_64 gen(99);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd p = random_params(gen, 6);
        const Eigen::VectorXd g = dualcv::biprobit_loglik(s.X1, s.y1, s.X2, s.y2, p).second;
        const Eigen::VectorXd fd = oracle::fd_gradient(
            [&](const Eigen::VectorXd& q) {
                return dualcv::biprobit_loglik(s.X1, s.y1, s.X2, s.y2, q).first;
            },
            p);
        for (Eigen::Index j = 0; j < 6; ++j) {
            CHECK(std::abs(g(j) - fd(j)) <= 1e-6 * std::max(1.0, std::abs(fd(j))));
        }
    }
}

TEST_CASE("likelihood stays finite when athrho saturates tanh") {
    const Sim s = make_data(30, 0.2, -0.5, 3);
    for (double a : {25.0, -25.0, 19.0}) {
        Eigen::VectorXd p = Eigen::VectorXd::Zero(6);
        p(5) = a;
        const auto [ll, g] = dualcv::biprobit_loglik(s.X1, s.y1, s.X2, s.y2, p);
        CHECK(std::isfinite(ll));
        CHECK(g.allFinite());
    }
}

TEST_CASE("joint fit nests the univariate pair") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Sim s = make_data(150, 0.5, -0.8, seed);
        const auto f1 = dualcv::fit_probit(s.X1, s.y1, {"const", "x1"});
        const auto f2 = dualcv::fit_probit(s.X2, s.y2, {"const", "y1", "x2"});
        const auto joint = dualcv::fit_biprobit(s.X1, s.y1, s.X2, s.y2, {"const", "x1"},
                                                {"const", "y1", "x2"});
        REQUIRE(joint.converged);
        CHECK(joint.loglik >= f1.loglik + f2.loglik - 1e-6);
    }
}

TEST_CASE("parameter recovery on a moderate synthetic sample") {
    const Sim s = make_data(2500, 0.6, -1.0, 4242);
    const auto fit = dualcv::fit_biprobit(s.X1, s.y1, s.X2, s.y2, {"const", "x1"},
                                          {"const", "y1", "x2"});
    REQUIRE(fit.converged);
    CHECK_FALSE(fit.boundary_warning);
    CHECK(std::abs(fit.eq1_coef("x1") - 0.9) <= 0.15);
    CHECK(std::abs(fit.eq2_coef("y1") - (-1.0)) <= 0.30);
    CHECK(std::abs(fit.eq2_coef("x2") - 0.8) <= 0.15);
    CHECK(std::abs(fit.rho - 0.6) <= 0.20);
    REQUIRE(fit.rho_se.has_value());
    CHECK(*fit.rho_se > 0.0);
    CHECK(fit.athrho_se() > 0.0);
    // The optimizer's contract: scaled gradient inf-norm at or below grad_tol.
    CHECK(fit.gradient_norm / std::max(1.0, std::abs(fit.loglik)) <= 1e-6);

    // The LR test should detect rho = 0.6 at this sample size.
    const auto f1 = dualcv::fit_probit(s.X1, s.y1, {"const", "x1"});
    const auto f2 = dualcv::fit_probit(s.X2, s.y2, {"const", "y1", "x2"});
    const auto lr = dualcv::lr_test_rho(fit, f1, f2);
    CHECK(lr.statistic >= 0.0);
    CHECK(lr.df == doctest::Approx(1.0));
    CHECK(lr.reject_at_5pct);

    // Exogeneity diagnostic: the univariate eta is biased upward under
    // positive error correlation.
    const auto exog = dualcv::exogeneity_diagnostic(f2, fit, "y1");
    CHECK(exog.eta_joint == doctest::Approx(fit.eq2_coef("y1")));
    CHECK(exog.eta_univariate > exog.eta_joint);
    CHECK(exog.endogeneity_indicated);
}

TEST_CASE("lr_test_rho validates the restricted pair") {
    const Sim s = make_data(150, 0.3, -0.5, 77);
    const auto joint = dualcv::fit_biprobit(s.X1, s.y1, s.X2, s.y2, {"const", "x1"},
                                            {"const", "y1", "x2"});
    const auto f1 = dualcv::fit_probit(s.X1, s.y1, {"const", "x1"});
    CHECK_THROWS_AS(dualcv::lr_test_rho(joint, f1, f1), dualcv::EstimationError);
}

TEST_CASE("exogeneity diagnostic requires the named regressor") {
    const Sim s = make_data(150, 0.3, -0.5, 78);
    const auto joint = dualcv::fit_biprobit(s.X1, s.y1, s.X2, s.y2, {"const", "x1"},
                                            {"const", "y1", "x2"});
    const auto f2 = dualcv::fit_probit(s.X2, s.y2, {"const", "y1", "x2"});
    CHECK_THROWS_AS(dualcv::exogeneity_diagnostic(f2, joint, "zzz"), dualcv::EstimationError);
}
