#include "dualcv/diagnostics.hpp"

#include "dualcv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace dualcv {

namespace {

std::string fmt_bid(double b) {
    std::ostringstream ss;
    ss << b;
    return ss.str();
}

}  // namespace

AnchoringResult anchoring_test(const Dataset& ds, const std::string& vehicle) {
    if (vehicle != "cash" && vehicle != "labor" && vehicle != "cross") {
        throw DataError("anchoring_test: vehicle must be cash, labor, or cross");
    }
    AnchoringResult out;
    out.vehicle = vehicle;

    // map preserves ascending bid order for the group listing
    std::map<double, std::vector<double>> by_bid;
    for (const auto& rec : ds.records) {
        const double bid = (vehicle == "labor") ? rec.bid_labor : rec.bid_cash;
        const auto& maxv = (vehicle == "cash") ? rec.max_wtp : rec.max_wtc;
        if (maxv) by_bid[bid].push_back(*maxv);
    }
    if (by_bid.empty()) {
        throw DataError("anchoring_test: no open-ended responses for vehicle '" + vehicle + "'");
    }

    std::vector<std::vector<double>> usable;
    for (auto& [bid, vals] : by_bid) {
        if (vals.size() < 2) {
            out.warnings.push_back("bid level " + fmt_bid(bid) + " has " +
                                   std::to_string(vals.size()) +
                                   " observation(s); dropped from the omnibus test");
            continue;
        }
        AnchorGroup g;
        g.bid = bid;
        g.n = vals.size();
        g.mean = mean(vals);
        const double se = sample_sd(vals) / std::sqrt(static_cast<double>(vals.size()));
        const double tq = student_t_quantile(0.975, static_cast<double>(vals.size() - 1));
        g.ci_low = g.mean - tq * se;
        g.ci_high = g.mean + tq * se;
        out.groups.push_back(g);
        usable.push_back(std::move(vals));
    }
    if (usable.size() >= 2) {
        out.omnibus = one_way_anova(usable);
    } else {
        out.warnings.push_back("fewer than two usable bid groups; omnibus test skipped");
    }
    return out;
}

namespace {

const char* pattern_label(int y1, int y2) {
    if (y1 == 1 && y2 == 1) return "Yes-Yes";
    if (y1 == 1 && y2 == 0) return "Yes-No";
    if (y1 == 0 && y2 == 1) return "No-Yes";
    return "No-No";
}

}  // namespace

EndowmentResult endowment_comparison(const Dataset& ds, const std::string& variable) {
    EndowmentResult out;
    out.variable = variable;
    if (ds.variable_meta.find(variable) == ds.variable_meta.end()) {
        throw DataError("endowment_comparison: unknown variable '" + variable + "'");
    }

    static constexpr std::pair<int, int> kPatterns[4] = {{1, 1}, {1, 0}, {0, 1}, {0, 0}};
    std::vector<std::vector<double>> groups(4);
    for (const auto& rec : ds.records) {
        const auto v = ds.value(rec, variable);
        if (!v) continue;
        for (int g = 0; g < 4; ++g) {
            if (rec.y1 == kPatterns[g].first && rec.y2 == kPatterns[g].second) {
                groups[static_cast<size_t>(g)].push_back(*v);
            }
        }
    }
    for (int g = 0; g < 4; ++g) {
        if (groups[static_cast<size_t>(g)].size() < 2) {
            out.warnings.push_back(std::string(pattern_label(kPatterns[g].first,
                                                             kPatterns[g].second)) +
                                   " has fewer than 2 observations; pairs skipped");
        }
    }
    for (int a = 0; a < 4; ++a) {
        for (int b = a + 1; b < 4; ++b) {
            const auto& ga = groups[static_cast<size_t>(a)];
            const auto& gb = groups[static_cast<size_t>(b)];
            if (ga.size() < 2 || gb.size() < 2) continue;
            const TestResult t = welch_t_test(ga, gb);
            GroupComparison c;
            c.group_a = pattern_label(kPatterns[a].first, kPatterns[a].second);
            c.group_b = pattern_label(kPatterns[b].first, kPatterns[b].second);
            c.variable = variable;
            c.n_a = ga.size();
            c.n_b = gb.size();
            c.mean_a = mean(ga);
            c.mean_b = mean(gb);
            c.statistic = t.statistic;
            c.df = t.df;
            c.p = t.p;
            out.comparisons.push_back(std::move(c));
        }
    }
    return out;
}

PatternShares response_pattern_shares(const Dataset& ds) {
    if (ds.records.empty()) throw DataError("response_pattern_shares: empty dataset");
    PatternShares s;
    s.n = ds.records.size();
    for (const auto& rec : ds.records) {
        if (rec.y1 == 1 && rec.y2 == 1) ++s.n_yy;
        else if (rec.y1 == 1) ++s.n_yn;
        else if (rec.y2 == 1) ++s.n_ny;
        else ++s.n_nn;
    }
    const double n = static_cast<double>(s.n);
    s.yy = static_cast<double>(s.n_yy) / n;
    s.yn = static_cast<double>(s.n_yn) / n;
    s.ny = static_cast<double>(s.n_ny) / n;
    s.nn = 1.0 - s.yy - s.yn - s.ny;  // complement keeps the sum at exactly 1
    return s;
}

Dataset with_active_labor(const Dataset& ds, const std::string& working_col,
                          const std::string& dependents_col, const std::string& name) {
    if (ds.columns.count(name)) {
        throw DataError("with_active_labor: column '" + name + "' already exists");
    }
    for (const auto& col : {working_col, dependents_col}) {
        if (!ds.columns.count(col)) {
            throw DataError("with_active_labor: unknown column '" + col + "'");
        }
    }
    Dataset out = ds;
    ColumnSpec cs;
    cs.role = ColumnRole::Covariate;
    cs.kind = VariableKind::Continuous;
    cs.description = std::string("derived: ") + kActiveLaborFormula;
    out.columns.emplace(name, cs);
    VariableMeta meta;
    meta.kind = VariableKind::Continuous;
    meta.description = cs.description;
    out.variable_meta.emplace(name, meta);
    for (auto& rec : out.records) {
        const auto w = ds.value(rec, working_col);
        const auto dep = ds.value(rec, dependents_col);
        rec.covariates[name] = (w && dep) ? *w / (1.0 + *dep)
                                          : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

}  // namespace dualcv
