#pragma once

#include "dualcv/data.hpp"
#include "dualcv/stats.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dualcv {

struct AnchorGroup {
    double bid = 0.0;
    size_t n = 0;
    double mean = 0.0;
    double ci_low = 0.0;   // 95% CI on the group mean (t-based)
    double ci_high = 0.0;
};

struct AnchoringResult {
    std::string vehicle;  // cash | labor | cross
    std::vector<AnchorGroup> groups;
    std::optional<TestResult> omnibus;  // absent with fewer than two usable groups
    std::vector<std::string> warnings;
};

// Starting-point check: groups the open-ended maxima by assigned bid level
// and runs a one-way ANOVA across groups. "cash" groups max WTP by cash bid,
// "labor" groups max WTC by labor bid, "cross" groups max WTC by cash bid.
// Groups with fewer than 2 observations are dropped with a warning.
AnchoringResult anchoring_test(const Dataset& ds, const std::string& vehicle);

struct GroupComparison {
    std::string group_a, group_b;
    std::string variable;
    size_t n_a = 0, n_b = 0;
    double mean_a = 0.0, mean_b = 0.0;
    double statistic = 0.0;
    double df = 0.0;
    double p = 1.0;
};

struct EndowmentResult {
    std::string variable;
    std::vector<GroupComparison> comparisons;  // all pairs of nonempty groups
    std::vector<std::string> warnings;
};

// Pairwise Welch t tests of a numeric variable between the four (y1, y2)
// response groups Yes-Yes, Yes-No, No-Yes, No-No.
EndowmentResult endowment_comparison(const Dataset& ds, const std::string& variable);

struct PatternShares {
    size_t n = 0;
    size_t n_yy = 0, n_yn = 0, n_ny = 0, n_nn = 0;
    double yy = 0.0, yn = 0.0, ny = 0.0, nn = 0.0;  // sum to 1 exactly
};

PatternShares response_pattern_shares(const Dataset& ds);

// Copy of the dataset with a derived covariate working / (1 + dependents)
// appended under `name`; the formula is the one recorded in report metadata.
Dataset with_active_labor(const Dataset& ds, const std::string& working_col,
                          const std::string& dependents_col,
                          const std::string& name = "active_labor");

inline const char* kActiveLaborFormula = "working_members / (1 + dependents)";

}  // namespace dualcv
