#pragma once

#include "dualcv/model.hpp"
#include "dualcv/probit.hpp"
#include "dualcv/stats.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dualcv {

struct BiprobitOptions {
    double grad_tol = 1e-6;  // on the scaled gradient inf-norm
    double ll_tol = 1e-10;   // relative loglik change
    int max_iter = 500;
};

// Joint fit of the recursive system. Parameter order throughout:
// (eq1 coefficients, eq2 coefficients, athrho).
struct BiprobitFit {
    std::vector<std::string> names1, names2;
    Eigen::VectorXd eq1_coefs, eq2_coefs;
    double athrho = 0.0;
    double rho = 0.0;  // tanh(athrho), stored from the same athrho
    Eigen::MatrixXd vcov;
    double loglik = 0.0;
    size_t n = 0;
    bool converged = false;
    int iterations = 0;
    bool boundary_warning = false;  // |rho| > 0.999
    double gradient_norm = 0.0;
    std::optional<double> rho_se;  // delta method, only when |rho| <= 0.999
    bool exclusion_ok = true;      // eq1 has a regressor absent from eq2

    Eigen::Index k1() const { return eq1_coefs.size(); }
    Eigen::Index k2() const { return eq2_coefs.size(); }
    double eq1_coef(const std::string& name) const;
    double eq2_coef(const std::string& name) const;
    double eq1_se(const std::string& name) const;
    double eq2_se(const std::string& name) const;
    double athrho_se() const;
};

// Loglik and analytic gradient at params = (beta1, beta2, athrho). Each
// record contributes the log of its (y1, y2) cell probability
// Phi2(q1 v1, q2 v2, q1 q2 rho) with q = 2y - 1.
std::pair<double, Eigen::VectorXd> biprobit_loglik(const Eigen::MatrixXd& X1,
                                                   const Eigen::VectorXd& y1,
                                                   const Eigen::MatrixXd& X2,
                                                   const Eigen::VectorXd& y2,
                                                   const Eigen::VectorXd& params);
std::pair<double, Eigen::VectorXd> biprobit_loglik(const BiprobitSpec& spec, const Dataset& ds,
                                                   const Eigen::VectorXd& params);

// Quasi-Newton (BFGS) ML fit warm-started from the univariate probits with
// athrho = 0. Returns converged=false instead of throwing when the iteration
// cap is hit.
BiprobitFit fit_biprobit(const Eigen::MatrixXd& X1, const Eigen::VectorXd& y1,
                         const Eigen::MatrixXd& X2, const Eigen::VectorXd& y2,
                         std::vector<std::string> names1, std::vector<std::string> names2,
                         const BiprobitOptions& options = {});
BiprobitFit fit_biprobit(const BiprobitSpec& spec, const Dataset& ds,
                         const BiprobitOptions& options = {});

// LR test of rho = 0: 2(loglik_joint - loglik_eq1 - loglik_eq2) ~ chi2(1).
// The restricted fits must use the same regressor sets (eq2 keeps y1 as an
// ordinary regressor).
TestResult lr_test_rho(const BiprobitFit& joint, const FitResult& restricted_eq1,
                       const FitResult& restricted_eq2);

// Side-by-side comparison of the y1 coefficient in the labor equation under
// independent and joint estimation.
struct ExogeneityReport {
    double eta_univariate = 0.0;
    double eta_joint = 0.0;
    double ratio = 0.0;  // eta_univariate / eta_joint
    double t_univariate = 0.0;
    double t_joint = 0.0;
    bool sign_agreement = true;
    bool endogeneity_indicated = false;
};

ExogeneityReport exogeneity_diagnostic(const FitResult& univ_eq2, const BiprobitFit& joint,
                                       const std::string& y1_name);

}  // namespace dualcv
