#pragma once

#include "dualcv/data.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace dualcv {

// One probit equation: outcome plus ordered regressors. A constant is always
// prepended to the design matrix and is not listed here.
struct ModelSpec {
    std::string outcome;
    std::vector<std::string> regressors;
    std::optional<std::string> endogenous_regressor;

    void validate() const;
};

// Two-equation recursive system: eq1's outcome enters eq2 as a regressor.
struct BiprobitSpec {
    ModelSpec eq1;
    ModelSpec eq2;

    // Throws on structural violations; returns false when the exclusion
    // restriction (an eq1-only regressor) is absent, in which case
    // identification rests on functional form alone.
    bool validate() const;

    static BiprobitSpec from_json_file(const std::string& path);
    static BiprobitSpec from_json_text(const std::string& text);
};

// Design matrix for one equation after listwise deletion. Column 0 is the
// constant; names[] runs parallel to the columns.
struct DesignData {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<size_t> rows;  // indices into the source dataset
    std::vector<std::string> names;
};

DesignData build_design(const ModelSpec& spec, const Dataset& ds);

// Both equations on the common estimation sample (listwise deletion across
// the union of regressors).
struct JointDesign {
    Eigen::MatrixXd X1, X2;
    Eigen::VectorXd y1, y2;
    std::vector<size_t> rows;
    std::vector<std::string> names1, names2;
};

JointDesign build_joint_design(const BiprobitSpec& spec, const Dataset& ds);

}  // namespace dualcv
