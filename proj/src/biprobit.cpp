#include "dualcv/biprobit.hpp"

#include "dualcv/bvn.hpp"
#include "dualcv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dualcv {

namespace {

constexpr double kProbFloor = 1e-300;

// Largest representable rho strictly inside (-1, 1) for likelihood work;
// tanh overflows to exactly 1 in doubles near athrho = 19.
double rho_from_athrho(double athrho) {
    const double r = std::tanh(athrho);
    return std::clamp(r, -1.0 + 1e-12, 1.0 - 1e-12);
}

// One record's log cell probability and its derivatives in the systematic
// utilities and in rho (Greene's analytic score).
struct CellScore {
    double logp;
    double s1;    // d log p / d v1
    double s2;    // d log p / d v2
    double srho;  // d log p / d rho
};

CellScore cell_score(double y1, double y2, double v1, double v2, double rho) {
    const double q1 = y1 > 0.5 ? 1.0 : -1.0;
    const double q2 = y2 > 0.5 ? 1.0 : -1.0;
    const double w1 = q1 * v1;
    const double w2 = q2 * v2;
    const double rs = q1 * q2 * rho;
    const Correlation crs(rs);
    const double p = std::max(bvn_cdf(w1, w2, crs), kProbFloor);
    const double denom = std::sqrt(1.0 - rs * rs);
    const double g1 = norm_pdf(w1) * norm_cdf((w2 - rs * w1) / denom);
    const double g2 = norm_pdf(w2) * norm_cdf((w1 - rs * w2) / denom);
    return {std::log(p), q1 * g1 / p, q2 * g2 / p, q1 * q2 * bvn_pdf(w1, w2, crs) / p};
}

}  // namespace

double BiprobitFit::eq1_coef(const std::string& name) const {
    for (size_t i = 0; i < names1.size(); ++i) {
        if (names1[i] == name) return eq1_coefs(static_cast<Eigen::Index>(i));
    }
    throw EstimationError("no eq1 coefficient named '" + name + "'");
}

double BiprobitFit::eq2_coef(const std::string& name) const {
    for (size_t i = 0; i < names2.size(); ++i) {
        if (names2[i] == name) return eq2_coefs(static_cast<Eigen::Index>(i));
    }
    throw EstimationError("no eq2 coefficient named '" + name + "'");
}

double BiprobitFit::eq1_se(const std::string& name) const {
    for (size_t i = 0; i < names1.size(); ++i) {
        if (names1[i] == name) {
            const auto j = static_cast<Eigen::Index>(i);
            return std::sqrt(vcov(j, j));
        }
    }
    throw EstimationError("no eq1 coefficient named '" + name + "'");
}

double BiprobitFit::eq2_se(const std::string& name) const {
    for (size_t i = 0; i < names2.size(); ++i) {
        if (names2[i] == name) {
            const auto j = k1() + static_cast<Eigen::Index>(i);
            return std::sqrt(vcov(j, j));
        }
    }
    throw EstimationError("no eq2 coefficient named '" + name + "'");
}

double BiprobitFit::athrho_se() const {
    const Eigen::Index j = k1() + k2();
    return std::sqrt(vcov(j, j));
}

std::pair<double, Eigen::VectorXd> biprobit_loglik(const Eigen::MatrixXd& X1,
                                                   const Eigen::VectorXd& y1,
                                                   const Eigen::MatrixXd& X2,
                                                   const Eigen::VectorXd& y2,
                                                   const Eigen::VectorXd& params) {
    const Eigen::Index n = X1.rows();
    const Eigen::Index k1 = X1.cols();
    const Eigen::Index k2 = X2.cols();
    if (X2.rows() != n || y1.size() != n || y2.size() != n || params.size() != k1 + k2 + 1) {
        throw EstimationError("biprobit_loglik: dimension mismatch");
    }
    const Eigen::VectorXd beta1 = params.head(k1);
    const Eigen::VectorXd beta2 = params.segment(k1, k2);
    const double athrho = params(k1 + k2);
    const double rho = rho_from_athrho(athrho);
    const double drho_dath = 1.0 - std::tanh(athrho) * std::tanh(athrho);

    const Eigen::VectorXd v1 = X1 * beta1;
    const Eigen::VectorXd v2 = X2 * beta2;

    double ll = 0.0;
    Eigen::VectorXd s1(n), s2(n);
    double grad_rho = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const CellScore c = cell_score(y1(i), y2(i), v1(i), v2(i), rho);
        ll += c.logp;
        s1(i) = c.s1;
        s2(i) = c.s2;
        grad_rho += c.srho;
    }
    Eigen::VectorXd grad(k1 + k2 + 1);
    grad.head(k1).noalias() = X1.transpose() * s1;
    grad.segment(k1, k2).noalias() = X2.transpose() * s2;
    grad(k1 + k2) = grad_rho * drho_dath;
    return {ll, std::move(grad)};
}

std::pair<double, Eigen::VectorXd> biprobit_loglik(const BiprobitSpec& spec, const Dataset& ds,
                                                   const Eigen::VectorXd& params) {
    const JointDesign d = build_joint_design(spec, ds);
    return biprobit_loglik(d.X1, d.y1, d.X2, d.y2, params);
}

BiprobitFit fit_biprobit(const Eigen::MatrixXd& X1, const Eigen::VectorXd& y1,
                         const Eigen::MatrixXd& X2, const Eigen::VectorXd& y2,
                         std::vector<std::string> names1, std::vector<std::string> names2,
                         const BiprobitOptions& options) {
    const Eigen::Index k1 = X1.cols();
    const Eigen::Index k2 = X2.cols();
    const Eigen::Index dim = k1 + k2 + 1;

    // Warm start: univariate fits, independence.
    FitOptions popts;
    const FitResult f1 = fit_probit(X1, y1, names1, popts);
    const FitResult f2 = fit_probit(X2, y2, names2, popts);
    Eigen::VectorXd theta(dim);
    theta.head(k1) = f1.coefficients;
    theta.segment(k1, k2) = f2.coefficients;
    theta(dim - 1) = 0.0;

    auto eval = [&](const Eigen::VectorXd& p) {
        return biprobit_loglik(X1, y1, X2, y2, p);
    };
    // Hessian of the loglik via central differences of the analytic gradient.
    auto fd_hessian = [&](const Eigen::VectorXd& p) {
        Eigen::MatrixXd H(dim, dim);
        for (Eigen::Index j = 0; j < dim; ++j) {
            const double h = 6e-6 * std::max(1.0, std::fabs(p(j)));
            Eigen::VectorXd tp = p, tm = p;
            tp(j) += h;
            tm(j) -= h;
            H.col(j) = (eval(tp).second - eval(tm).second) / (2.0 * h);
        }
        return Eigen::MatrixXd(0.5 * (H + H.transpose()));
    };

    auto [ll, grad] = eval(theta);
    Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(dim, dim);

    BiprobitFit out;
    out.names1 = std::move(names1);
    out.names2 = std::move(names2);
    out.n = static_cast<size_t>(X1.rows());

    int iter = 0;
    for (; iter < options.max_iter; ++iter) {
        const double scaled_grad = grad.cwiseAbs().maxCoeff() / std::max(1.0, std::fabs(ll));
        if (scaled_grad <= options.grad_tol) {
            out.converged = true;
            break;
        }

        Eigen::VectorXd direction = Hinv * grad;  // ascent direction
        if (direction.dot(grad) <= 0.0) {
            Hinv = Eigen::MatrixXd::Identity(dim, dim);
            direction = grad;
        }

        // Backtracking line search with an Armijo condition on the loglik.
        double t = 1.0;
        double ll_new = -std::numeric_limits<double>::infinity();
        Eigen::VectorXd theta_new, grad_new;
        const double slope = direction.dot(grad);
        bool accepted = false;
        for (int half = 0; half < 50; ++half) {
            theta_new = theta + t * direction;
            std::tie(ll_new, grad_new) = eval(theta_new);
            if (std::isfinite(ll_new) && ll_new >= ll + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // Flat to machine precision along the search direction; let the
            // Newton polish below decide whether this is the optimum.
            break;
        }

        const Eigen::VectorXd s = theta_new - theta;
        const Eigen::VectorXd yv = grad_new - grad;  // gradient of ll, ascent form
        const double sy = -s.dot(yv);                // positive near a maximum
        if (iter == 0 && sy > 1e-12) {
            // Nocedal-Wright initial scaling before the first update.
            Hinv *= sy / yv.squaredNorm();
        }
        if (sy > 1e-12) {
            // BFGS update on the inverse Hessian of -ll.
            const Eigen::VectorXd Hy = Hinv * (-yv);
            const double yHy = (-yv).dot(Hy);
            Hinv += ((sy + yHy) / (sy * sy)) * (s * s.transpose()) -
                    (Hy * s.transpose() + s * Hy.transpose()) / sy;
        }

        const double rel_change = std::fabs(ll_new - ll) / std::max(1.0, std::fabs(ll));
        theta = theta_new;
        grad = grad_new;
        ll = ll_new;
        if (rel_change <= options.ll_tol &&
            grad.cwiseAbs().maxCoeff() / std::max(1.0, std::fabs(ll)) <= options.grad_tol) {
            out.converged = true;
            ++iter;
            break;
        }
    }

    // BFGS creeps once progress needs the exact quadratic model (typically
    // along athrho when |rho| is large), so finish with Newton steps on the
    // observed information. Stop once the predicted gain of a full step drops
    // below the rounding noise of an n-term loglik sum: past that point no
    // improvement is verifiable in double precision, and a small gradient
    // identifies the iterate as the numerical MLE.
    const double noise = std::sqrt(static_cast<double>(out.n)) *
                         std::numeric_limits<double>::epsilon();
    const double stall_tol = std::max(options.grad_tol, 1e-5);
    for (int polish = 0; !out.converged && polish < 40; ++polish) {
        const double scale = std::max(1.0, std::fabs(ll));
        const double scaled_grad = grad.cwiseAbs().maxCoeff() / scale;
        if (scaled_grad <= options.grad_tol) {
            out.converged = true;
            break;
        }
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(Eigen::MatrixXd(-fd_hessian(theta)));
        const Eigen::VectorXd step = ldlt.solve(grad);
        const double gain = 0.5 * grad.dot(step);
        if (ldlt.info() != Eigen::Success || !step.allFinite() || gain <= noise * scale) {
            out.converged = scaled_grad <= stall_tol;
            break;
        }
        double t = 1.0;
        double ll_new = -std::numeric_limits<double>::infinity();
        Eigen::VectorXd theta_new, grad_new;
        bool accepted = false;
        for (int half = 0; half < 40; ++half) {
            theta_new = theta + t * step;
            std::tie(ll_new, grad_new) = eval(theta_new);
            if (std::isfinite(ll_new) && ll_new >= ll - noise * scale) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            out.converged = scaled_grad <= stall_tol;
            break;
        }
        // A step that realizes no gain inside the worst-case rounding noise
        // means the loglik is flat at machine precision around the iterate.
        const bool flat = ll_new <= ll && gain <= static_cast<double>(out.n) *
                                                      std::numeric_limits<double>::epsilon() *
                                                      scale;
        theta = theta_new;
        ll = ll_new;
        grad = grad_new;
        ++iter;
        if (flat) {
            out.converged =
                grad.cwiseAbs().maxCoeff() / std::max(1.0, std::fabs(ll)) <= stall_tol;
            break;
        }
    }

    out.iterations = iter;
    out.eq1_coefs = theta.head(k1);
    out.eq2_coefs = theta.segment(k1, k2);
    out.athrho = theta(dim - 1);
    out.rho = std::tanh(out.athrho);
    out.loglik = ll;
    out.gradient_norm = grad.cwiseAbs().maxCoeff();
    out.boundary_warning = std::fabs(out.rho) > 0.999;

    // Observed information at the optimum.
    const Eigen::MatrixXd H = fd_hessian(theta);
    out.vcov = (-H).ldlt().solve(Eigen::MatrixXd::Identity(dim, dim));
    if (out.boundary_warning) {
        // At |rho| -> 1 the likelihood is flat in athrho and near-kinked in
        // the coefficients, so differenced curvature is noise. Fall back to
        // the outer product of the analytic per-record scores (BHHH) for the
        // coefficient block, conditional on rho at its boundary value, and
        // mark the athrho direction as unidentified.
        const Eigen::Index k = dim - 1;
        const double rho = rho_from_athrho(theta(dim - 1));
        const Eigen::VectorXd v1 = X1 * theta.head(k1);
        const Eigen::VectorXd v2 = X2 * theta.segment(k1, k2);
        Eigen::MatrixXd S(X1.rows(), k);
        for (Eigen::Index i = 0; i < X1.rows(); ++i) {
            const CellScore c = cell_score(y1(i), y2(i), v1(i), v2(i), rho);
            S.row(i).head(k1) = c.s1 * X1.row(i);
            S.row(i).tail(k2) = c.s2 * X2.row(i);
        }
        const Eigen::MatrixXd opg = S.transpose() * S;
        out.vcov = Eigen::MatrixXd::Zero(dim, dim);
        out.vcov.topLeftCorner(k, k) = opg.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
        out.vcov(k, k) = std::numeric_limits<double>::quiet_NaN();
    } else {
        const double drho = 1.0 - out.rho * out.rho;
        out.rho_se = drho * std::sqrt(out.vcov(dim - 1, dim - 1));
    }
    return out;
}

BiprobitFit fit_biprobit(const BiprobitSpec& spec, const Dataset& ds,
                         const BiprobitOptions& options) {
    const bool exclusion_ok = spec.validate();
    JointDesign d = build_joint_design(spec, ds);
    BiprobitFit fit = fit_biprobit(d.X1, d.y1, d.X2, d.y2, std::move(d.names1),
                                   std::move(d.names2), options);
    fit.exclusion_ok = exclusion_ok;
    return fit;
}

TestResult lr_test_rho(const BiprobitFit& joint, const FitResult& restricted_eq1,
                       const FitResult& restricted_eq2) {
    if (joint.names1 != restricted_eq1.names || joint.names2 != restricted_eq2.names) {
        throw EstimationError("lr_test_rho: restricted fits use different regressor sets");
    }
    double stat = 2.0 * (joint.loglik - restricted_eq1.loglik - restricted_eq2.loglik);
    if (stat < -1e-6) {
        throw EstimationError("lr_test_rho: joint loglik below restricted sum (" +
                              std::to_string(stat) + "); fits not comparable");
    }
    stat = std::max(stat, 0.0);
    TestResult t;
    t.name = "LR test of rho = 0";
    t.statistic = stat;
    t.df = 1.0;
    t.p = chisq_sf(stat, 1.0);
    t.reject_at_5pct = t.p < 0.05;
    return t;
}

ExogeneityReport exogeneity_diagnostic(const FitResult& univ_eq2, const BiprobitFit& joint,
                                       const std::string& y1_name) {
    ExogeneityReport r;
    const auto idx = univ_eq2.index(y1_name);
    if (!idx) {
        throw EstimationError("exogeneity_diagnostic: univariate fit lacks '" + y1_name + "'");
    }
    bool found = false;
    for (const auto& nm : joint.names2) {
        if (nm == y1_name) found = true;
    }
    if (!found) {
        throw EstimationError("exogeneity_diagnostic: joint fit lacks '" + y1_name + "'");
    }
    r.eta_univariate = univ_eq2.coefficients(*idx);
    r.eta_joint = joint.eq2_coef(y1_name);
    r.ratio = r.eta_joint != 0.0 ? r.eta_univariate / r.eta_joint
                                 : std::numeric_limits<double>::quiet_NaN();
    r.t_univariate = r.eta_univariate / univ_eq2.se(*idx);
    const double se_joint = joint.eq2_se(y1_name);
    r.t_joint = r.eta_joint / se_joint;
    r.sign_agreement = (r.eta_univariate >= 0.0) == (r.eta_joint >= 0.0);
    r.endogeneity_indicated =
        !r.sign_agreement || std::fabs(r.eta_univariate - r.eta_joint) > 2.0 * se_joint;
    return r;
}

}  // namespace dualcv
