#include "dualcv/effects.hpp"

#include "dualcv/bvn.hpp"
#include "dualcv/errors.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace dualcv {

std::vector<AmeRow> ame(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                        const std::vector<VariableKind>& kinds, const Eigen::VectorXd& coefs,
                        const Eigen::MatrixXd& vcov) {
    const Eigen::Index n = X.rows();
    const Eigen::Index k = X.cols();
    if (static_cast<Eigen::Index>(names.size()) != k ||
        static_cast<Eigen::Index>(kinds.size()) != k || coefs.size() != k || vcov.rows() != k) {
        throw EstimationError("ame: dimension mismatch");
    }
    const Eigen::VectorXd v = X * coefs;
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<AmeRow> rows;
    for (Eigen::Index j = 1; j < k; ++j) {  // column 0 is the constant
        AmeRow row;
        row.variable = names[static_cast<size_t>(j)];
        row.kind = kinds[static_cast<size_t>(j)];
        row.eval_base = X.col(j).mean();

        Eigen::VectorXd jac = Eigen::VectorXd::Zero(k);
        if (row.kind == VariableKind::Continuous) {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double d = norm_pdf(v(i));
                acc += d * coefs(j);
                // d/db_m [phi(v_i) b_j] = -v_i phi(v_i) x_im b_j + phi(v_i) 1{m=j}
                jac += (-v(i) * d * coefs(j)) * X.row(i).transpose();
                jac(j) += d;
            }
            row.ame = acc * inv_n;
            jac *= inv_n;
        } else {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                Eigen::RowVectorXd x1 = X.row(i);
                Eigen::RowVectorXd x0 = X.row(i);
                x1(j) = 1.0;
                x0(j) = 0.0;
                const double v1 = x1.dot(coefs);
                const double v0 = x0.dot(coefs);
                acc += norm_cdf(v1) - norm_cdf(v0);
                jac += norm_pdf(v1) * x1.transpose() - norm_pdf(v0) * x0.transpose();
            }
            row.ame = acc * inv_n;
            jac *= inv_n;
        }
        row.se = std::sqrt(std::max(0.0, jac.dot(vcov * jac)));
        row.ci_low = row.ame - 1.96 * row.se;
        row.ci_high = row.ame + 1.96 * row.se;
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::vector<VariableKind> kinds_for(const std::vector<std::string>& names, const Dataset& ds) {
    std::vector<VariableKind> kinds;
    kinds.reserve(names.size());
    for (const auto& nm : names) {
        if (nm == "const") {
            kinds.push_back(VariableKind::Continuous);
            continue;
        }
        auto it = ds.variable_meta.find(nm);
        if (it == ds.variable_meta.end()) {
            throw EstimationError("ame: variable '" + nm + "' not in dataset metadata");
        }
        kinds.push_back(it->second.kind);
    }
    return kinds;
}

}  // namespace

std::vector<AmeRow> ame(const FitResult& fit, const ModelSpec& spec, const Dataset& ds) {
    if (!fit.converged) throw EstimationError("ame: fit did not converge");
    const DesignData d = build_design(spec, ds);
    return ame(d.X, d.names, kinds_for(d.names, ds), fit.coefficients, fit.vcov);
}

std::vector<AmeRow> ame(const BiprobitFit& fit, const BiprobitSpec& spec, const Dataset& ds,
                        int equation) {
    if (equation != 1 && equation != 2) {
        throw EstimationError("ame: equation must be 1 or 2");
    }
    if (!fit.converged) throw EstimationError("ame: fit did not converge");
    const JointDesign d = build_joint_design(spec, ds);
    if (equation == 1) {
        return ame(d.X1, d.names1, kinds_for(d.names1, ds), fit.eq1_coefs,
                   fit.vcov.topLeftCorner(fit.k1(), fit.k1()));
    }
    return ame(d.X2, d.names2, kinds_for(d.names2, ds), fit.eq2_coefs,
               fit.vcov.block(fit.k1(), fit.k1(), fit.k2(), fit.k2()));
}

std::string ame_report(const std::vector<AmeRow>& rows) {
    if (rows.empty()) throw EstimationError("ame_report: no rows");
    size_t width = 8;
    for (const auto& r : rows) width = std::max(width, r.variable.size());
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(width)) << "variable" << std::right
        << std::setw(9) << "AME" << std::setw(9) << "se" << std::setw(18) << "95% C.I."
        << std::setw(9) << "mean" << '\n';
    out << std::string(width + 45, '-') << '\n';
    out << std::fixed << std::setprecision(2);
    for (const auto& r : rows) {
        std::ostringstream ci;
        ci << std::fixed << std::setprecision(2) << '[' << r.ci_low << ", " << r.ci_high << ']';
        out << std::left << std::setw(static_cast<int>(width)) << r.variable << std::right
            << std::setw(9) << r.ame << std::setw(9) << r.se << std::setw(18) << ci.str()
            << std::setw(9) << r.eval_base << '\n';
    }
    return out.str();
}

}  // namespace dualcv
