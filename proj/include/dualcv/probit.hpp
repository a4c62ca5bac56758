#pragma once

#include "dualcv/model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dualcv {

struct FitOptions {
    double tol = 1e-8;   // convergence threshold on the scaled gradient inf-norm
    int max_iter = 200;
};

struct FitResult {
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;
    Eigen::MatrixXd vcov;
    double loglik = 0.0;
    size_t n = 0;
    bool converged = false;
    int iterations = 0;
    double gradient_norm = 0.0;

    std::optional<Eigen::Index> index(const std::string& name) const;
    double coef(const std::string& name) const;  // throws on unknown name
    double se(Eigen::Index i) const;
    double se(const std::string& name) const;
    double tstat(const std::string& name) const;
};

// Loglik and analytic gradient of the probit model at beta.
std::pair<double, Eigen::VectorXd> probit_loglik(const Eigen::MatrixXd& X,
                                                 const Eigen::VectorXd& y,
                                                 const Eigen::VectorXd& beta);
std::pair<double, Eigen::VectorXd> probit_loglik(const ModelSpec& spec, const Dataset& ds,
                                                 const Eigen::VectorXd& beta);

// Newton-Raphson ML fit. Throws EstimationError on separation, rank
// deficiency, outcomes without variation, or non-convergence.
FitResult fit_probit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     std::vector<std::string> names, const FitOptions& options = {});
FitResult fit_probit(const ModelSpec& spec, const Dataset& ds, const FitOptions& options = {});

}  // namespace dualcv
