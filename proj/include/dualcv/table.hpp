#pragma once

#include "dualcv/biprobit.hpp"
#include "dualcv/diagnostics.hpp"
#include "dualcv/probit.hpp"
#include "dualcv/simulate.hpp"
#include "dualcv/welfare.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dualcv {

// ASCII tables, two decimals on coefficients and welfare values.

// Side-by-side layout: univariate pair on the left, joint model on the
// right, athrho/rho rows, loglik and LR test at the foot.
std::string fit_table(const FitResult& univ_eq1, const FitResult& univ_eq2,
                      const BiprobitFit& joint, const std::optional<TestResult>& lr,
                      const std::optional<ExogeneityReport>& exog);

std::string welfare_table(const WelfareReport& rep);

std::string summary_table(const std::vector<VariableSummary>& rows);

std::string diagnostics_table(const std::vector<AnchoringResult>& anchoring,
                              const std::vector<EndowmentResult>& endowment,
                              const PatternShares& shares);

std::string mc_table(const McResult& r);

}  // namespace dualcv
