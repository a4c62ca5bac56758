#pragma once

#include "dualcv/biprobit.hpp"
#include "dualcv/data.hpp"
#include "dualcv/diagnostics.hpp"
#include "dualcv/effects.hpp"
#include "dualcv/probit.hpp"
#include "dualcv/simulate.hpp"
#include "dualcv/welfare.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace dualcv {

// All artifacts serialize through ordered_json so key order — and therefore
// the emitted bytes — are stable across runs.
using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const FitResult& fit);
ordered_json to_json(const BiprobitFit& fit);
ordered_json to_json(const TestResult& t);
ordered_json to_json(const ExogeneityReport& r);
ordered_json to_json(const std::vector<AmeRow>& rows);
ordered_json to_json(const WelfareReport& rep);
ordered_json to_json(const AnchoringResult& r);
ordered_json to_json(const EndowmentResult& r);
ordered_json to_json(const PatternShares& s);
ordered_json to_json(const McResult& r);
ordered_json to_json(const std::vector<VariableSummary>& rows);
ordered_json to_json(const std::vector<Exclusion>& rows);
ordered_json to_json(const LoadReport& rep);

// Reads the coefficient blocks of a previously written fit artifact back
// into a BiprobitFit (point estimates and vcov diagonal only).
BiprobitFit biprobit_from_json(const ordered_json& j);

}  // namespace dualcv
