#include "dualcv/serialize.hpp"

#include "dualcv/errors.hpp"

#include <cmath>
#include <limits>

namespace dualcv {

namespace {

ordered_json coef_block(const std::vector<std::string>& names, const Eigen::VectorXd& est,
                        const Eigen::MatrixXd& vcov, Eigen::Index offset) {
    ordered_json block = ordered_json::object();
    for (size_t i = 0; i < names.size(); ++i) {
        const auto j = offset + static_cast<Eigen::Index>(i);
        const double se = std::sqrt(vcov(j, j));
        block[names[i]] = {{"est", est(static_cast<Eigen::Index>(i))},
                           {"se", se},
                           {"t", est(static_cast<Eigen::Index>(i)) / se}};
    }
    return block;
}

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& j) {
    const auto r = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXd m(r, r > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const auto& cell = j[static_cast<size_t>(i)][static_cast<size_t>(c)];
            // Non-finite entries round-trip through JSON null.
            m(i, c) = cell.is_number() ? cell.get<double>()
                                       : std::numeric_limits<double>::quiet_NaN();
        }
    }
    return m;
}

}  // namespace

ordered_json to_json(const FitResult& fit) {
    ordered_json j;
    j["coefficients"] = coef_block(fit.names, fit.coefficients, fit.vcov, 0);
    j["loglik"] = fit.loglik;
    j["n"] = fit.n;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    return j;
}

ordered_json to_json(const BiprobitFit& fit) {
    ordered_json j;
    j["eq1"] = coef_block(fit.names1, fit.eq1_coefs, fit.vcov, 0);
    j["eq2"] = coef_block(fit.names2, fit.eq2_coefs, fit.vcov, fit.k1());
    const double ath_se = fit.athrho_se();
    j["athrho"] = {{"est", fit.athrho}, {"se", ath_se}, {"t", fit.athrho / ath_se}};
    j["rho"] = fit.rho;
    if (fit.rho_se) j["rho_se"] = *fit.rho_se;
    j["boundary_warning"] = fit.boundary_warning;
    j["loglik"] = fit.loglik;
    j["n"] = fit.n;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["exclusion_restriction"] = fit.exclusion_ok;
    j["vcov"] = matrix_to_json(fit.vcov);
    return j;
}

ordered_json to_json(const TestResult& t) {
    ordered_json j;
    j["name"] = t.name;
    j["statistic"] = t.statistic;
    j["df"] = t.df;
    if (t.df2 > 0.0) j["df2"] = t.df2;
    j["p"] = t.p;
    j["reject_at_5pct"] = t.reject_at_5pct;
    return j;
}

ordered_json to_json(const ExogeneityReport& r) {
    ordered_json j;
    j["eta_univariate"] = r.eta_univariate;
    j["eta_joint"] = r.eta_joint;
    j["ratio"] = std::isfinite(r.ratio) ? ordered_json(r.ratio) : ordered_json(nullptr);
    j["t_univariate"] = r.t_univariate;
    j["t_joint"] = r.t_joint;
    j["sign_agreement"] = r.sign_agreement;
    j["endogeneity_indicated"] = r.endogeneity_indicated;
    return j;
}

ordered_json to_json(const std::vector<AmeRow>& rows) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) {
        arr.push_back({{"variable", r.variable},
                       {"ame", r.ame},
                       {"se", r.se},
                       {"ci_low", r.ci_low},
                       {"ci_high", r.ci_high},
                       {"kind", r.kind == VariableKind::Dummy ? "discrete" : "continuous"},
                       {"eval_base", r.eval_base}});
    }
    return arr;
}

ordered_json to_json(const WelfareReport& rep) {
    ordered_json j;
    j["n"] = rep.n;
    j["wage_mode"] = rep.wage_mode;
    j["truncate_negative"] = rep.truncated;
    j["shadow_wage"] = {{"ratio", rep.reference_wage.ratio},
                        {"lower", rep.reference_wage.lower},
                        {"upper", rep.reference_wage.upper},
                        {"mean_w", rep.reference_wage.mean_w}};
    ordered_json s;
    s["cv_money"] = {{"mean", rep.mean_cv_money}, {"sd", rep.sd_cv_money}};
    s["cv_labor_monthly"] = {{"mean", rep.mean_cv_labor}, {"sd", rep.sd_cv_labor}};
    s["cv_labor_annual_days"] = {{"mean", rep.mean_annual_days}, {"sd", rep.sd_annual_days}};
    s["labor_value_slack"] = rep.mean_labor_value_slack;
    s["labor_value_peak"] = rep.mean_labor_value_peak;
    s["labor_value"] = rep.mean_labor_value;
    s["cv_total"] = {{"mean", rep.mean_cv_total}, {"sd", rep.sd_cv_total}};
    s["cash_share"] = rep.cash_share;
    j["summary"] = std::move(s);
    if (rep.ci_mean_cv_money) {
        j["ci95"] = {{"cv_money", {rep.ci_mean_cv_money->lo, rep.ci_mean_cv_money->hi}},
                     {"cv_labor", {rep.ci_mean_cv_labor->lo, rep.ci_mean_cv_labor->hi}},
                     {"cv_total", {rep.ci_mean_cv_total->lo, rep.ci_mean_cv_total->hi}}};
    }
    ordered_json per = ordered_json::array();
    for (const auto& r : rep.per_respondent) {
        per.push_back({{"id", r.id},
                       {"cv_money", r.cv_money},
                       {"cv_labor", r.cv_labor},
                       {"cv_labor_annual_days", r.cv_labor_annual_days},
                       {"mean_w", r.mean_w},
                       {"cv_total", r.cv_total}});
    }
    j["per_respondent"] = std::move(per);
    return j;
}

ordered_json to_json(const AnchoringResult& r) {
    ordered_json j;
    j["vehicle"] = r.vehicle;
    ordered_json groups = ordered_json::array();
    for (const auto& g : r.groups) {
        groups.push_back({{"bid", g.bid},
                          {"n", g.n},
                          {"mean", g.mean},
                          {"ci_low", g.ci_low},
                          {"ci_high", g.ci_high}});
    }
    j["groups"] = std::move(groups);
    j["omnibus"] = r.omnibus ? to_json(*r.omnibus) : ordered_json(nullptr);
    j["warnings"] = r.warnings;
    return j;
}

ordered_json to_json(const EndowmentResult& r) {
    ordered_json j;
    j["variable"] = r.variable;
    ordered_json arr = ordered_json::array();
    for (const auto& c : r.comparisons) {
        arr.push_back({{"group_a", c.group_a},
                       {"group_b", c.group_b},
                       {"n_a", c.n_a},
                       {"n_b", c.n_b},
                       {"mean_a", c.mean_a},
                       {"mean_b", c.mean_b},
                       {"statistic", c.statistic},
                       {"df", c.df},
                       {"p", c.p}});
    }
    j["comparisons"] = std::move(arr);
    j["warnings"] = r.warnings;
    return j;
}

ordered_json to_json(const PatternShares& s) {
    ordered_json j;
    j["n"] = s.n;
    j["counts"] = {{"yes_yes", s.n_yy}, {"yes_no", s.n_yn}, {"no_yes", s.n_ny},
                   {"no_no", s.n_nn}};
    j["shares"] = {{"yes_yes", s.yy}, {"yes_no", s.yn}, {"no_yes", s.ny}, {"no_no", s.nn}};
    return j;
}

ordered_json to_json(const McResult& r) {
    ordered_json j;
    j["replications"] = r.replications;
    j["failures"] = r.failures;
    j["failure_rate"] = r.failure_rate;
    j["n"] = r.n;
    j["seed"] = r.seed;
    j["lr_rejection_rate"] = r.lr_rejection_rate;
    j["eta_univ_mean_bias"] = r.eta_univ_mean_bias;
    j["eta_flip_or_insig_rate"] = r.eta_flip_or_insig_rate;
    j["eta_joint_coverage"] = r.eta_joint_coverage;
    ordered_json arr = ordered_json::array();
    for (const auto& p : r.params) {
        arr.push_back({{"equation", p.equation},
                       {"name", p.name},
                       {"truth", p.truth},
                       {"mean_est", p.mean_est},
                       {"bias", p.bias},
                       {"rmse", p.rmse},
                       {"ci_coverage", p.ci_coverage}});
    }
    j["params"] = std::move(arr);
    return j;
}

ordered_json to_json(const std::vector<VariableSummary>& rows) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) {
        ordered_json item;
        item["name"] = r.name;
        item["kind"] = r.kind == VariableKind::Dummy ? "dummy" : "continuous";
        item["n"] = r.n;
        item["mean"] = r.mean;
        item["sd"] = r.sd;
        if (r.kind == VariableKind::Dummy) item["share"] = r.share;
        arr.push_back(std::move(item));
    }
    return arr;
}

ordered_json to_json(const std::vector<Exclusion>& rows) {
    ordered_json arr = ordered_json::array();
    for (const auto& e : rows) {
        arr.push_back({{"id", e.id},
                       {"rule", e.rule},
                       {"bid", e.bid},
                       {"stated_max", e.stated_max}});
    }
    return arr;
}

ordered_json to_json(const LoadReport& rep) {
    ordered_json j;
    j["rows_read"] = rep.rows_read;
    j["missing"] = rep.missing_counts;
    j["warnings"] = rep.warnings;
    return j;
}

BiprobitFit biprobit_from_json(const ordered_json& j) {
    BiprobitFit fit;
    auto read_block = [](const ordered_json& block, std::vector<std::string>& names,
                         Eigen::VectorXd& est) {
        names.clear();
        est.resize(static_cast<Eigen::Index>(block.size()));
        Eigen::Index i = 0;
        for (const auto& [name, v] : block.items()) {
            names.push_back(name);
            est(i++) = v.at("est").get<double>();
        }
    };
    if (!j.contains("eq1") || !j.contains("eq2")) {
        throw DataError("fit artifact: missing eq1/eq2 coefficient blocks");
    }
    read_block(j["eq1"], fit.names1, fit.eq1_coefs);
    read_block(j["eq2"], fit.names2, fit.eq2_coefs);
    fit.athrho = j.at("athrho").at("est").get<double>();
    fit.rho = j.at("rho").get<double>();
    if (j.contains("rho_se") && !j["rho_se"].is_null()) fit.rho_se = j["rho_se"].get<double>();
    fit.boundary_warning = j.value("boundary_warning", false);
    fit.loglik = j.value("loglik", 0.0);
    fit.n = j.value("n", size_t{0});
    fit.converged = j.value("converged", false);
    fit.iterations = j.value("iterations", 0);
    fit.exclusion_ok = j.value("exclusion_restriction", true);
    if (j.contains("vcov")) {
        fit.vcov = matrix_from_json(j["vcov"]);
    } else {
        fit.vcov = Eigen::MatrixXd::Zero(fit.k1() + fit.k2() + 1, fit.k1() + fit.k2() + 1);
    }
    return fit;
}

}  // namespace dualcv
