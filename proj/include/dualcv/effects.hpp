#pragma once

#include "dualcv/biprobit.hpp"
#include "dualcv/model.hpp"
#include "dualcv/probit.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace dualcv {

struct AmeRow {
    std::string variable;
    double ame = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    VariableKind kind = VariableKind::Continuous;
    double eval_base = 0.0;  // sample mean of the regressor
};

// Average marginal effects over the estimation sample. Continuous regressor:
// mean phi(v_i) * coef. Dummy regressor: mean [Phi(v_i | d=1) - Phi(v_i | d=0)],
// the counterfactual 0 -> 1 probability change. Standard errors by the delta
// method on the supplied vcov; CIs are +/- 1.96 se. The constant carries no
// effect and is omitted.
std::vector<AmeRow> ame(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                        const std::vector<VariableKind>& kinds, const Eigen::VectorXd& coefs,
                        const Eigen::MatrixXd& vcov);

// Univariate fit on its estimation sample.
std::vector<AmeRow> ame(const FitResult& fit, const ModelSpec& spec, const Dataset& ds);

// Joint fit; equation selects the index (1 or 2). Equation 2 treats y1 as a
// conditioning regressor on the structural index, so y1 itself carries a
// discrete effect.
std::vector<AmeRow> ame(const BiprobitFit& fit, const BiprobitSpec& spec, const Dataset& ds,
                        int equation);

// Aligned-text rendering: AME, se, 95% CI, evaluation mean per row.
std::string ame_report(const std::vector<AmeRow>& rows);

}  // namespace dualcv
