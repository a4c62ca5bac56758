#include "dualcv/welfare.hpp"

#include "dualcv/errors.hpp"
#include "dualcv/rng.hpp"
#include "dualcv/stats.hpp"

#include <algorithm>
#include <cmath>

namespace dualcv {

ShadowWage shadow_wage(double wage_slack, double wage_peak, double ratio) {
    if (!(wage_slack > 0.0) || !(wage_peak > 0.0)) {
        throw std::domain_error("shadow_wage: wages must be positive");
    }
    if (!(ratio > 0.0) || ratio > 1.0) {
        throw std::domain_error("shadow_wage: ratio must lie in (0, 1]");
    }
    if (wage_slack > wage_peak) {
        throw std::domain_error("shadow_wage: slack wage exceeds peak wage");
    }
    ShadowWage sw;
    sw.ratio = ratio;
    sw.lower = ratio * wage_slack;
    sw.upper = ratio * wage_peak;
    sw.mean_w = 0.5 * (sw.lower + sw.upper);
    return sw;
}

double cv_money(double v1_nobid, double beta1) {
    if (beta1 >= 0.0) {
        throw EstimationError("cv_money: cash bid coefficient is non-negative; welfare undefined");
    }
    return -v1_nobid / beta1;
}

double cv_labor(double v2_nobid, double theta1) {
    if (theta1 >= 0.0) {
        throw EstimationError("cv_labor: labor bid coefficient is non-negative; welfare undefined");
    }
    return -v2_nobid / theta1;
}

TotalWelfare cv_total(double cv_m, double cv_l_monthly, const ShadowWage& sw) {
    TotalWelfare t;
    const double annual_days = 12.0 * cv_l_monthly;
    t.labor_value_slack = annual_days * sw.lower;
    t.labor_value_peak = annual_days * sw.upper;
    t.labor_value_mean = annual_days * sw.mean_w;
    t.total = cv_m + t.labor_value_mean;
    return t;
}

namespace {

struct BidIndex {
    Eigen::Index eq1_bid = -1;
    Eigen::Index eq2_bid = -1;
};

BidIndex locate_bids(const JointDesign& d, const Dataset& ds) {
    const auto cash = ds.bid_column("cash");
    const auto labor = ds.bid_column("labor");
    if (!cash || !labor) throw DataError("welfare: dataset lacks mapped bid columns");
    BidIndex out;
    for (size_t j = 0; j < d.names1.size(); ++j) {
        if (d.names1[j] == *cash) out.eq1_bid = static_cast<Eigen::Index>(j);
    }
    for (size_t j = 0; j < d.names2.size(); ++j) {
        if (d.names2[j] == *labor) out.eq2_bid = static_cast<Eigen::Index>(j);
    }
    if (out.eq1_bid < 0) throw DataError("welfare: eq1 does not include the cash bid");
    if (out.eq2_bid < 0) throw DataError("welfare: eq2 does not include the labor bid");
    return out;
}

// Sample-mean wage band over the estimation rows; respondents without wages
// fall back to it in respondent mode.
ShadowWage reference_wage_band(const Dataset& ds, const JointDesign& d,
                               const WelfareOptions& opt) {
    if (opt.wage_slack && opt.wage_peak) {
        return shadow_wage(*opt.wage_slack, *opt.wage_peak, opt.shadow_ratio);
    }
    double sum_s = 0.0, sum_p = 0.0;
    size_t n_s = 0, n_p = 0;
    for (size_t idx : d.rows) {
        const auto& rec = ds.records[idx];
        if (rec.wage_slack) {
            sum_s += *rec.wage_slack;
            ++n_s;
        }
        if (rec.wage_peak) {
            sum_p += *rec.wage_peak;
            ++n_p;
        }
    }
    if (n_s == 0 || n_p == 0) {
        throw DataError("welfare: no wage data in sample (supply wage columns or overrides)");
    }
    return shadow_wage(sum_s / static_cast<double>(n_s), sum_p / static_cast<double>(n_p),
                       opt.shadow_ratio);
}

struct MeanCvs {
    double money = 0.0, labor = 0.0, total = 0.0;
    bool valid = false;
};

// Sample means of the three CV measures at a given parameter point; reused
// by both the point estimate and the simulation draws.
MeanCvs mean_cvs(const JointDesign& d, const Dataset& ds, const BidIndex& bi,
                 const Eigen::VectorXd& b1, const Eigen::VectorXd& b2, const ShadowWage& ref,
                 const WelfareOptions& opt) {
    MeanCvs out;
    if (b1(bi.eq1_bid) >= 0.0 || b2(bi.eq2_bid) >= 0.0) return out;  // invalid draw
    const Eigen::VectorXd v1 = d.X1 * b1;
    const Eigen::VectorXd v2 = d.X2 * b2;
    const double n = static_cast<double>(d.rows.size());
    for (Eigen::Index i = 0; i < v1.size(); ++i) {
        const auto& rec = ds.records[d.rows[static_cast<size_t>(i)]];
        const double v1_nobid = v1(i) - b1(bi.eq1_bid) * d.X1(i, bi.eq1_bid);
        const double v2_nobid = v2(i) - b2(bi.eq2_bid) * d.X2(i, bi.eq2_bid);
        double m = cv_money(v1_nobid, b1(bi.eq1_bid));
        double l = cv_labor(v2_nobid, b2(bi.eq2_bid));
        if (opt.truncate_negative) {
            m = std::max(0.0, m);
            l = std::max(0.0, l);
        }
        ShadowWage sw = ref;
        if (opt.wage_mode == WelfareOptions::WageMode::Respondent && rec.wage_slack &&
            rec.wage_peak) {
            sw = shadow_wage(*rec.wage_slack, *rec.wage_peak, opt.shadow_ratio);
        }
        out.money += m;
        out.labor += l;
        out.total += m + 12.0 * l * sw.mean_w;
    }
    out.money /= n;
    out.labor /= n;
    out.total /= n;
    out.valid = true;
    return out;
}

WelfareInterval percentile_interval(std::vector<double>& xs) {
    std::sort(xs.begin(), xs.end());
    auto pct = [&](double q) {
        const double pos = q * static_cast<double>(xs.size() - 1);
        const size_t lo = static_cast<size_t>(pos);
        const size_t hi = std::min(lo + 1, xs.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return xs[lo] * (1.0 - frac) + xs[hi] * frac;
    };
    return {pct(0.025), pct(0.975)};
}

}  // namespace

WelfareReport welfare_report(const BiprobitFit& fit, const BiprobitSpec& spec, const Dataset& ds,
                             const WelfareOptions& options) {
    if (!fit.converged) throw EstimationError("welfare: fit did not converge");
    const JointDesign d = build_joint_design(spec, ds);
    const BidIndex bi = locate_bids(d, ds);
    const ShadowWage ref = reference_wage_band(ds, d, options);

    WelfareReport rep;
    rep.reference_wage = ref;
    rep.wage_mode =
        options.wage_mode == WelfareOptions::WageMode::Respondent ? "respondent" : "global";
    rep.truncated = options.truncate_negative;
    rep.n = d.rows.size();

    const Eigen::VectorXd v1 = d.X1 * fit.eq1_coefs;
    const Eigen::VectorXd v2 = d.X2 * fit.eq2_coefs;
    const double beta1 = fit.eq1_coefs(bi.eq1_bid);
    const double theta1 = fit.eq2_coefs(bi.eq2_bid);

    std::vector<double> cv_m_all, cv_l_all, annual_all, total_all;
    double sum_lv_slack = 0.0, sum_lv_peak = 0.0, sum_lv_mean = 0.0;
    for (Eigen::Index i = 0; i < v1.size(); ++i) {
        const auto& rec = ds.records[d.rows[static_cast<size_t>(i)]];
        RespondentWelfare rw;
        rw.id = rec.id;
        const double v1_nobid = v1(i) - beta1 * d.X1(i, bi.eq1_bid);
        const double v2_nobid = v2(i) - theta1 * d.X2(i, bi.eq2_bid);
        rw.cv_money = cv_money(v1_nobid, beta1);
        rw.cv_labor = cv_labor(v2_nobid, theta1);
        if (options.truncate_negative) {
            rw.cv_money = std::max(0.0, rw.cv_money);
            rw.cv_labor = std::max(0.0, rw.cv_labor);
        }
        ShadowWage sw = ref;
        if (options.wage_mode == WelfareOptions::WageMode::Respondent && rec.wage_slack &&
            rec.wage_peak) {
            sw = shadow_wage(*rec.wage_slack, *rec.wage_peak, options.shadow_ratio);
        }
        rw.mean_w = sw.mean_w;
        const TotalWelfare tw = cv_total(rw.cv_money, rw.cv_labor, sw);
        rw.cv_labor_annual_days = 12.0 * rw.cv_labor;
        rw.cv_total = tw.total;
        sum_lv_slack += tw.labor_value_slack;
        sum_lv_peak += tw.labor_value_peak;
        sum_lv_mean += tw.labor_value_mean;
        cv_m_all.push_back(rw.cv_money);
        cv_l_all.push_back(rw.cv_labor);
        annual_all.push_back(rw.cv_labor_annual_days);
        total_all.push_back(rw.cv_total);
        rep.per_respondent.push_back(std::move(rw));
    }

    const double n = static_cast<double>(rep.n);
    rep.mean_cv_money = mean(cv_m_all);
    rep.sd_cv_money = sample_sd(cv_m_all);
    rep.mean_cv_labor = mean(cv_l_all);
    rep.sd_cv_labor = sample_sd(cv_l_all);
    rep.mean_annual_days = mean(annual_all);
    rep.sd_annual_days = sample_sd(annual_all);
    rep.mean_labor_value_slack = sum_lv_slack / n;
    rep.mean_labor_value_peak = sum_lv_peak / n;
    rep.mean_labor_value = sum_lv_mean / n;
    rep.mean_cv_total = mean(total_all);
    rep.sd_cv_total = sample_sd(total_all);
    if (rep.mean_cv_total != 0.0) rep.cash_share = rep.mean_cv_money / rep.mean_cv_total;

    if (options.sim_draws > 0) {
        // Parameter-uncertainty CIs: draw (b1, b2) from the asymptotic normal
        // and track the three sample means per draw.
        const Eigen::Index k = fit.k1() + fit.k2();
        Eigen::VectorXd theta(k);
        theta << fit.eq1_coefs, fit.eq2_coefs;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fit.vcov.topLeftCorner(k, k));
        const Eigen::MatrixXd root =
            es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        std::vector<double> ms, ls, ts;
        for (size_t draw = 0; draw < options.sim_draws; ++draw) {
            Eigen::VectorXd z(k);
            for (Eigen::Index j = 0; j < k; ++j) {
                z(j) = rng::normal(rng::at(options.seed, 0xCE11, draw, static_cast<size_t>(j)));
            }
            const Eigen::VectorXd td = theta + root * z;
            const MeanCvs mc = mean_cvs(d, ds, bi, td.head(fit.k1()), td.tail(fit.k2()), ref,
                                        options);
            if (!mc.valid) continue;  // wrong-signed bid coefficient in this draw
            ms.push_back(mc.money);
            ls.push_back(mc.labor);
            ts.push_back(mc.total);
        }
        if (ms.size() >= 2) {
            rep.ci_mean_cv_money = percentile_interval(ms);
            rep.ci_mean_cv_labor = percentile_interval(ls);
            rep.ci_mean_cv_total = percentile_interval(ts);
        }
    }
    return rep;
}

}  // namespace dualcv
