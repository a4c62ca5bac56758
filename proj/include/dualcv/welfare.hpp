#pragma once

#include "dualcv/biprobit.hpp"
#include "dualcv/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dualcv {

// Shadow-wage band derived from seasonal market wages: a fixed fraction of
// the slack and peak daily wages, with the midpoint used for valuation.
struct ShadowWage {
    double ratio = 0.3863;
    double lower = 0.0;   // ETB/day, slack season
    double upper = 0.0;   // ETB/day, peak season
    double mean_w = 0.0;  // (lower + upper) / 2
};

ShadowWage shadow_wage(double wage_slack, double wage_peak, double ratio = 0.3863);

// Hanemann linear-utility compensating surplus: the bid level at which the
// respondent is indifferent, -v_nobid / bid_coef. Throws when the bid
// coefficient is non-negative (demand not downward-sloping).
double cv_money(double v1_nobid, double beta1);   // ETB/year
double cv_labor(double v2_nobid, double theta1);  // days/month

// Money value of the combined money+labor surplus, with the labor days
// valued at the shadow wage band.
struct TotalWelfare {
    double total = 0.0;             // cv_m + 12 * cv_l * mean_w, ETB/year
    double labor_value_slack = 0.0; // annual days * lower
    double labor_value_peak = 0.0;  // annual days * upper
    double labor_value_mean = 0.0;  // annual days * mean_w
};

TotalWelfare cv_total(double cv_m, double cv_l_monthly, const ShadowWage& sw);

struct WelfareOptions {
    double shadow_ratio = 0.3863;
    enum class WageMode { Respondent, Global } wage_mode = WageMode::Respondent;
    bool truncate_negative = false;
    size_t sim_draws = 0;  // simulation CIs off by default; 5000 is the documented choice
    std::uint64_t seed = 42;
    // When both are set they replace the sample-mean wage band (useful when
    // the survey lacks wage columns).
    std::optional<double> wage_slack;
    std::optional<double> wage_peak;
};

struct RespondentWelfare {
    std::string id;
    double cv_money = 0.0;            // ETB/year
    double cv_labor = 0.0;            // days/month
    double cv_labor_annual_days = 0.0;
    double mean_w = 0.0;              // shadow wage used for this respondent
    double cv_total = 0.0;            // ETB/year
};

struct WelfareInterval {
    double lo = 0.0;
    double hi = 0.0;
};

struct WelfareReport {
    std::vector<RespondentWelfare> per_respondent;
    // Sample summary (means and sds over respondents).
    double mean_cv_money = 0.0, sd_cv_money = 0.0;
    double mean_cv_labor = 0.0, sd_cv_labor = 0.0;   // days/month
    double mean_annual_days = 0.0, sd_annual_days = 0.0;
    double mean_labor_value_slack = 0.0;   // ETB/year at the lower shadow wage
    double mean_labor_value_peak = 0.0;    // ETB/year at the upper shadow wage
    double mean_labor_value = 0.0;         // ETB/year at mean_w
    double mean_cv_total = 0.0, sd_cv_total = 0.0;
    double cash_share = 0.0;  // mean cv_money / mean cv_total
    ShadowWage reference_wage;  // from sample-mean wages (the global-mode wage)
    std::string wage_mode;      // "respondent" | "global"
    bool truncated = false;
    size_t n = 0;
    // Present when sim_draws > 0: parameter-uncertainty CIs for the means.
    std::optional<WelfareInterval> ci_mean_cv_money;
    std::optional<WelfareInterval> ci_mean_cv_labor;
    std::optional<WelfareInterval> ci_mean_cv_total;
};

// Per-respondent welfare from a converged joint fit. Wages come from the
// dataset's wage columns; respondents without wages fall back to the
// sample-mean wage band.
WelfareReport welfare_report(const BiprobitFit& fit, const BiprobitSpec& spec, const Dataset& ds,
                             const WelfareOptions& options = {});

}  // namespace dualcv
