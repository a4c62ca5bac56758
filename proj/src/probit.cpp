#include "dualcv/probit.hpp"

#include "dualcv/bvn.hpp"
#include "dualcv/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dualcv {

std::optional<Eigen::Index> FitResult::index(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<Eigen::Index>(i);
    }
    return std::nullopt;
}

double FitResult::coef(const std::string& name) const {
    auto i = index(name);
    if (!i) throw EstimationError("no coefficient named '" + name + "'");
    return coefficients(*i);
}

double FitResult::se(Eigen::Index i) const { return std::sqrt(vcov(i, i)); }

double FitResult::se(const std::string& name) const {
    auto i = index(name);
    if (!i) throw EstimationError("no coefficient named '" + name + "'");
    return se(*i);
}

double FitResult::tstat(const std::string& name) const { return coef(name) / se(name); }

std::pair<double, Eigen::VectorXd> probit_loglik(const Eigen::MatrixXd& X,
                                                 const Eigen::VectorXd& y,
                                                 const Eigen::VectorXd& beta) {
    if (X.cols() != beta.size() || X.rows() != y.size()) {
        throw EstimationError("probit_loglik: dimension mismatch");
    }
    const Eigen::VectorXd v = X * beta;
    double ll = 0.0;
    Eigen::VectorXd score(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        // log Phi(q*v) with q = 2y-1; score factor lambda = phi(v)/Phi(q*v)*q.
        const double q = y(i) > 0.5 ? 1.0 : -1.0;
        ll += log_norm_cdf(q * v(i));
        score(i) = q * inverse_mills(q * v(i));
    }
    Eigen::VectorXd grad = X.transpose() * score;
    return {ll, std::move(grad)};
}

std::pair<double, Eigen::VectorXd> probit_loglik(const ModelSpec& spec, const Dataset& ds,
                                                 const Eigen::VectorXd& beta) {
    const DesignData d = build_design(spec, ds);
    return probit_loglik(d.X, d.y, beta);
}

FitResult fit_probit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     std::vector<std::string> names, const FitOptions& options) {
    const Eigen::Index n = X.rows();
    const Eigen::Index k = X.cols();
    if (y.size() != n) throw EstimationError("fit_probit: X/y row mismatch");
    const double ybar = y.mean();
    if (ybar <= 0.0 || ybar >= 1.0) {
        throw EstimationError("fit_probit: outcome has no variation");
    }
    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        qr.setThreshold(1e-10);
        if (qr.rank() < k) {
            throw EstimationError("fit_probit: rank-deficient design matrix (rank " +
                                  std::to_string(qr.rank()) + " of " + std::to_string(k) + ")");
        }
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    beta(0) = norm_quantile(ybar);  // exact MLE for the intercept-only model

    auto [ll, grad] = probit_loglik(X, y, beta);
    FitResult out;
    out.names = std::move(names);
    out.n = static_cast<size_t>(n);

    Eigen::MatrixXd neg_hess(k, k);
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        // Negative Hessian: sum of lambda_i (lambda_i + v_i) x x' (positive definite).
        const Eigen::VectorXd v = X * beta;
        Eigen::VectorXd w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double q = y(i) > 0.5 ? 1.0 : -1.0;
            const double s = q * inverse_mills(q * v(i));
            w(i) = s * (s + v(i));
        }
        neg_hess.noalias() = X.transpose() * w.asDiagonal() * X;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_hess);
        if (ldlt.info() != Eigen::Success) {
            throw EstimationError("fit_probit: Hessian factorization failed");
        }
        Eigen::VectorXd step = ldlt.solve(grad);

        // Expected gain from a full Newton step (the Newton decrement) and
        // the rounding noise of an n-term loglik sum: sqrt(n) eps |ll| in
        // expectation, n eps |ll| worst case. Once the predicted gain is
        // below the noise, no progress is verifiable in double precision and
        // the iterate is the numerical MLE even if the gradient test has not
        // been met yet.
        const double decrement = 0.5 * grad.dot(step);
        const double noise =
            std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(ll));
        if (decrement <= std::sqrt(static_cast<double>(n)) * noise) {
            out.converged = true;
            break;
        }

        // Step-halving line search on the (concave) loglik.
        double t = 1.0;
        double ll_new = -std::numeric_limits<double>::infinity();
        Eigen::VectorXd beta_new;
        Eigen::VectorXd grad_new;
        for (int half = 0; half < 40; ++half) {
            beta_new = beta + t * step;
            std::tie(ll_new, grad_new) = probit_loglik(X, y, beta_new);
            if (std::isfinite(ll_new) && ll_new >= ll - 1e-12) break;
            t *= 0.5;
        }
        if (!std::isfinite(ll_new)) throw EstimationError("fit_probit: loglik diverged");

        const double ll_change = ll_new - ll;
        beta = beta_new;
        ll = ll_new;
        grad = grad_new;
        out.iterations = iter;

        const double scaled_grad = grad.cwiseAbs().maxCoeff() / std::max(1.0, std::fabs(ll));
        if (beta.cwiseAbs().maxCoeff() > 50.0 && ll_change > 1e-8) {
            throw EstimationError(
                "fit_probit: separation detected (diverging coefficients, loglik still "
                "improving)");
        }
        if (scaled_grad <= options.tol) {
            out.converged = true;
            break;
        }
        if (ll_change <= 0.0 && decrement <= static_cast<double>(n) * noise) {
            // The search could not realize a gain that is inside the
            // worst-case rounding noise: flat at machine precision.
            out.converged = true;
            break;
        }
    }

    if (!out.converged) {
        throw EstimationError("fit_probit: no convergence after " +
                              std::to_string(options.max_iter) + " iterations");
    }
    // A loglik at (numerical) zero means every outcome is predicted with
    // probability one, i.e. the data are separated and the MLE sits at
    // infinity; the flat tail satisfies the gradient test long before the
    // divergence guard above can fire.
    if (ll > -1e-5) {
        throw EstimationError("fit_probit: separation detected (outcomes perfectly predicted)");
    }
    const Eigen::VectorXd v = X * beta;
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double q = y(i) > 0.5 ? 1.0 : -1.0;
        const double s = q * inverse_mills(q * v(i));
        w(i) = s * (s + v(i));
    }
    neg_hess.noalias() = X.transpose() * w.asDiagonal() * X;
    out.vcov = neg_hess.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    out.coefficients = std::move(beta);
    out.loglik = ll;
    out.gradient_norm = grad.cwiseAbs().maxCoeff();
    return out;
}

FitResult fit_probit(const ModelSpec& spec, const Dataset& ds, const FitOptions& options) {
    DesignData d = build_design(spec, ds);
    return fit_probit(d.X, d.y, std::move(d.names), options);
}

}  // namespace dualcv
