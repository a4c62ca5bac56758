#include "dualcv/table.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

namespace dualcv {

namespace {

std::string num(double v, int prec = 2) {
    if (!std::isfinite(v)) return ".";  // unidentified / not available
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(prec) << v;
    return ss.str();
}

void row(std::ostringstream& out, const std::string& label, size_t lw,
         const std::string& c1, const std::string& c2, const std::string& c3,
         const std::string& c4) {
    out << std::left << std::setw(static_cast<int>(lw)) << label << std::right << std::setw(12)
        << c1 << std::setw(9) << c2 << std::setw(12) << c3 << std::setw(9) << c4 << '\n';
}

}  // namespace

std::string fit_table(const FitResult& univ_eq1, const FitResult& univ_eq2,
                      const BiprobitFit& joint, const std::optional<TestResult>& lr,
                      const std::optional<ExogeneityReport>& exog) {
    size_t lw = 12;
    for (const auto& n : joint.names1) lw = std::max(lw, n.size() + 2);
    for (const auto& n : joint.names2) lw = std::max(lw, n.size() + 2);

    std::ostringstream out;
    out << "Estimated coefficients, univariate and joint probit models\n\n";
    row(out, "", lw, "Univariate", "", "Joint", "");
    row(out, "Variable", lw, "Coef.", "t", "Coef.", "t");
    out << std::string(lw + 42, '-') << '\n';

    out << "Equation y2 (labor)\n";
    for (size_t i = 0; i < joint.names2.size(); ++i) {
        const auto& name = joint.names2[i];
        const double cj = joint.eq2_coefs(static_cast<Eigen::Index>(i));
        const double sj = joint.eq2_se(name);
        std::string uc = "", ut = "";
        if (auto idx = univ_eq2.index(name)) {
            uc = num(univ_eq2.coefficients(*idx));
            ut = num(univ_eq2.coefficients(*idx) / univ_eq2.se(*idx));
        }
        row(out, "  " + name, lw, uc, ut, num(cj), num(cj / sj));
    }
    out << "Equation y1 (cash)\n";
    for (size_t i = 0; i < joint.names1.size(); ++i) {
        const auto& name = joint.names1[i];
        const double cj = joint.eq1_coefs(static_cast<Eigen::Index>(i));
        const double sj = joint.eq1_se(name);
        std::string uc = "", ut = "";
        if (auto idx = univ_eq1.index(name)) {
            uc = num(univ_eq1.coefficients(*idx));
            ut = num(univ_eq1.coefficients(*idx) / univ_eq1.se(*idx));
        }
        row(out, "  " + name, lw, uc, ut, num(cj), num(cj / sj));
    }
    const double ath_se = joint.athrho_se();
    row(out, "  athrho", lw, "", "", num(joint.athrho), num(joint.athrho / ath_se));
    row(out, "  rho", lw, "", "", num(joint.rho), "");
    out << std::string(lw + 42, '-') << '\n';
    row(out, "Log likelihood", lw, num(univ_eq1.loglik + univ_eq2.loglik), "",
        num(joint.loglik), "");
    row(out, "N", lw, std::to_string(univ_eq2.n), "", std::to_string(joint.n), "");
    if (joint.boundary_warning) {
        out << "note: correlation at the boundary (|rho| > 0.999)\n";
    }
    if (lr) {
        out << "LR test of rho = 0: chi2(" << lr->df << ") = " << num(lr->statistic, 3)
            << ", p = " << num(lr->p, 4) << '\n';
    }
    if (exog) {
        out << "y1 coefficient in eq2: univariate " << num(exog->eta_univariate) << " (t "
            << num(exog->t_univariate) << "), joint " << num(exog->eta_joint) << " (t "
            << num(exog->t_joint) << ")"
            << (exog->endogeneity_indicated ? " -- endogeneity indicated" : "") << '\n';
    }
    return out.str();
}

std::string welfare_table(const WelfareReport& rep) {
    std::ostringstream out;
    out << "Mean WTP and WTC for reliable irrigation service (n = " << rep.n << ")\n\n";
    const size_t lw = 46;
    auto line = [&](const std::string& label, double mean_v, double sd_v, bool with_sd = true) {
        out << std::left << std::setw(static_cast<int>(lw)) << label << std::right
            << std::setw(10) << num(mean_v);
        if (with_sd) out << std::setw(10) << num(sd_v);
        out << '\n';
    };
    out << std::left << std::setw(static_cast<int>(lw)) << "Measure" << std::right
        << std::setw(10) << "Mean" << std::setw(10) << "Std.Dev." << '\n';
    out << std::string(lw + 20, '-') << '\n';
    line("WTP, cash (ETB/year)", rep.mean_cv_money, rep.sd_cv_money);
    line("WTC, labor (days/month)", rep.mean_cv_labor, rep.sd_cv_labor);
    line("WTC, labor (days/year)", rep.mean_annual_days, rep.sd_annual_days);
    line("Slack agricultural season WTC (ETB/year)", rep.mean_labor_value_slack, 0.0, false);
    line("Peak agricultural season WTC (ETB/year)", rep.mean_labor_value_peak, 0.0, false);
    line("Average annual WTC (ETB/year)", rep.mean_labor_value, 0.0, false);
    line("Total average annual WTP+WTC (ETB/year)", rep.mean_cv_total, rep.sd_cv_total);
    out << std::string(lw + 20, '-') << '\n';
    out << "Cash share of total: " << num(100.0 * rep.cash_share) << "%\n";
    out << "Shadow wage band: [" << num(rep.reference_wage.lower) << ", "
        << num(rep.reference_wage.upper) << "] ETB/day (ratio " << rep.reference_wage.ratio
        << ", mode " << rep.wage_mode << ")\n";
    if (rep.ci_mean_cv_money) {
        out << "95% CI (simulation): WTP [" << num(rep.ci_mean_cv_money->lo) << ", "
            << num(rep.ci_mean_cv_money->hi) << "], total [" << num(rep.ci_mean_cv_total->lo)
            << ", " << num(rep.ci_mean_cv_total->hi) << "]\n";
    }
    return out.str();
}

std::string summary_table(const std::vector<VariableSummary>& rows) {
    size_t lw = 10;
    for (const auto& r : rows) lw = std::max(lw, r.name.size() + 2);
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(lw)) << "Variable" << std::right
        << std::setw(12) << "Kind" << std::setw(8) << "N" << std::setw(10) << "Mean"
        << std::setw(10) << "Std.Dev." << '\n';
    out << std::string(lw + 40, '-') << '\n';
    for (const auto& r : rows) {
        out << std::left << std::setw(static_cast<int>(lw)) << r.name << std::right
            << std::setw(12) << (r.kind == VariableKind::Dummy ? "dummy" : "continuous")
            << std::setw(8) << r.n << std::setw(10) << num(r.mean) << std::setw(10) << num(r.sd)
            << '\n';
    }
    return out.str();
}

std::string diagnostics_table(const std::vector<AnchoringResult>& anchoring,
                              const std::vector<EndowmentResult>& endowment,
                              const PatternShares& shares) {
    std::ostringstream out;
    out << "Response patterns (n = " << shares.n << ")\n";
    out << "  Yes-Yes " << num(100.0 * shares.yy, 1) << "%   Yes-No "
        << num(100.0 * shares.yn, 1) << "%   No-Yes " << num(100.0 * shares.ny, 1)
        << "%   No-No " << num(100.0 * shares.nn, 1) << "%\n\n";
    for (const auto& a : anchoring) {
        out << "Anchoring check, vehicle '" << a.vehicle << "'\n";
        out << "  bid        n      mean    95% C.I.\n";
        for (const auto& g : a.groups) {
            out << "  " << std::left << std::setw(9) << g.bid << std::right << std::setw(4)
                << g.n << std::setw(10) << num(g.mean) << "    [" << num(g.ci_low) << ", "
                << num(g.ci_high) << "]\n";
        }
        if (a.omnibus) {
            out << "  ANOVA F(" << a.omnibus->df << ", " << a.omnibus->df2
                << ") = " << num(a.omnibus->statistic, 3) << ", p = " << num(a.omnibus->p, 4)
                << '\n';
        }
        for (const auto& w : a.warnings) out << "  note: " << w << '\n';
        out << '\n';
    }
    for (const auto& e : endowment) {
        out << "Endowment comparison: " << e.variable << '\n';
        for (const auto& c : e.comparisons) {
            out << "  " << c.group_a << " (" << num(c.mean_a) << ") vs " << c.group_b << " ("
                << num(c.mean_b) << "): t = " << num(c.statistic, 3) << ", p = " << num(c.p, 4)
                << '\n';
        }
        for (const auto& w : e.warnings) out << "  note: " << w << '\n';
        out << '\n';
    }
    return out.str();
}

std::string mc_table(const McResult& r) {
    std::ostringstream out;
    out << "Monte Carlo: " << r.replications << " replications, n = " << r.n << " (seed "
        << r.seed << ")\n";
    out << "  failures: " << r.failures << " (" << num(100.0 * r.failure_rate, 1) << "%)\n";
    out << "  LR(rho=0) rejection rate at 5%: " << num(r.lr_rejection_rate, 3) << '\n';
    out << "  univariate eta mean bias: " << num(r.eta_univ_mean_bias, 3)
        << ", flip-or-insignificant rate: " << num(r.eta_flip_or_insig_rate, 3) << '\n';
    size_t lw = 10;
    for (const auto& p : r.params) lw = std::max(lw, p.name.size() + 2);
    out << '\n'
        << std::left << std::setw(6) << "eq" << std::setw(static_cast<int>(lw)) << "param"
        << std::right << std::setw(10) << "truth" << std::setw(10) << "mean" << std::setw(10)
        << "bias" << std::setw(10) << "rmse" << std::setw(10) << "cover" << '\n';
    out << std::string(lw + 56, '-') << '\n';
    for (const auto& p : r.params) {
        out << std::left << std::setw(6) << p.equation << std::setw(static_cast<int>(lw))
            << p.name << std::right << std::setw(10) << num(p.truth, 3) << std::setw(10)
            << num(p.mean_est, 3) << std::setw(10) << num(p.bias, 3) << std::setw(10)
            << num(p.rmse, 3) << std::setw(10) << num(p.ci_coverage, 3) << '\n';
    }
    return out.str();
}

}  // namespace dualcv
