#include "dualcv/model.hpp"

#include "dualcv/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace dualcv {

namespace {

using ordered_json = nlohmann::ordered_json;

ModelSpec equation_from_json(const ordered_json& j, const std::string& label) {
    ModelSpec spec;
    if (!j.contains("outcome") || !j["outcome"].is_string()) {
        throw DataError("model spec: " + label + ": missing 'outcome'");
    }
    spec.outcome = j["outcome"].get<std::string>();
    if (!j.contains("regressors") || !j["regressors"].is_array()) {
        throw DataError("model spec: " + label + ": missing 'regressors' array");
    }
    for (const auto& r : j["regressors"]) spec.regressors.push_back(r.get<std::string>());
    if (j.contains("endogenous")) spec.endogenous_regressor = j["endogenous"].get<std::string>();
    spec.validate();
    return spec;
}

}  // namespace

void ModelSpec::validate() const {
    if (outcome.empty()) throw DataError("model spec: empty outcome name");
    std::set<std::string> seen;
    for (const auto& r : regressors) {
        if (r == outcome) throw DataError("model spec: outcome '" + outcome + "' used as regressor");
        if (!seen.insert(r).second) throw DataError("model spec: duplicate regressor '" + r + "'");
    }
    if (endogenous_regressor &&
        std::find(regressors.begin(), regressors.end(), *endogenous_regressor) ==
            regressors.end()) {
        throw DataError("model spec: endogenous regressor '" + *endogenous_regressor +
                        "' not among regressors");
    }
}

bool BiprobitSpec::validate() const {
    eq1.validate();
    eq2.validate();
    if (!eq2.endogenous_regressor || *eq2.endogenous_regressor != eq1.outcome) {
        throw DataError("model spec: eq2 must declare eq1's outcome '" + eq1.outcome +
                        "' as its endogenous regressor");
    }
    // Exclusion restriction: at least one eq1 regressor absent from eq2.
    for (const auto& r : eq1.regressors) {
        if (std::find(eq2.regressors.begin(), eq2.regressors.end(), r) == eq2.regressors.end()) {
            return true;
        }
    }
    return false;
}

BiprobitSpec BiprobitSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model spec file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

BiprobitSpec BiprobitSpec::from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw DataError(std::string("model spec: invalid JSON: ") + e.what());
    }
    if (!j.contains("eq1") || !j.contains("eq2")) {
        throw DataError("model spec: both 'eq1' and 'eq2' are required");
    }
    BiprobitSpec spec;
    spec.eq1 = equation_from_json(j["eq1"], "eq1");
    spec.eq2 = equation_from_json(j["eq2"], "eq2");
    if (!spec.eq2.endogenous_regressor) spec.eq2.endogenous_regressor = spec.eq1.outcome;
    spec.validate();
    return spec;
}

namespace {

// Row is usable iff the outcome and every regressor resolve to a value.
bool row_complete(const Dataset& ds, const SurveyRecord& rec, const ModelSpec& spec) {
    if (!ds.value(rec, spec.outcome)) return false;
    for (const auto& r : spec.regressors) {
        if (!ds.value(rec, r)) return false;
    }
    return true;
}

void check_variables_known(const Dataset& ds, const ModelSpec& spec) {
    auto known = [&](const std::string& name) {
        auto it = ds.columns.find(name);
        return it != ds.columns.end() && it->second.role != ColumnRole::Id &&
               it->second.role != ColumnRole::Passthrough;
    };
    if (!known(spec.outcome)) throw DataError("model spec: unknown outcome '" + spec.outcome + "'");
    for (const auto& r : spec.regressors) {
        if (!known(r)) throw DataError("model spec: unknown regressor '" + r + "'");
    }
}

void fill_row(const Dataset& ds, const SurveyRecord& rec, const ModelSpec& spec,
              Eigen::MatrixXd& X, Eigen::VectorXd& y, Eigen::Index row) {
    X(row, 0) = 1.0;
    for (size_t j = 0; j < spec.regressors.size(); ++j) {
        X(row, static_cast<Eigen::Index>(j + 1)) = *ds.value(rec, spec.regressors[j]);
    }
    y(row) = *ds.value(rec, spec.outcome);
}

std::vector<std::string> column_names(const ModelSpec& spec) {
    std::vector<std::string> names;
    names.reserve(spec.regressors.size() + 1);
    names.push_back("const");
    names.insert(names.end(), spec.regressors.begin(), spec.regressors.end());
    return names;
}

}  // namespace

DesignData build_design(const ModelSpec& spec, const Dataset& ds) {
    spec.validate();
    check_variables_known(ds, spec);
    DesignData out;
    for (size_t i = 0; i < ds.records.size(); ++i) {
        if (row_complete(ds, ds.records[i], spec)) out.rows.push_back(i);
    }
    if (out.rows.empty()) throw DataError("no complete rows for model on '" + spec.outcome + "'");
    const auto n = static_cast<Eigen::Index>(out.rows.size());
    const auto k = static_cast<Eigen::Index>(spec.regressors.size() + 1);
    out.X.resize(n, k);
    out.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        fill_row(ds, ds.records[out.rows[static_cast<size_t>(i)]], spec, out.X, out.y, i);
    }
    out.names = column_names(spec);
    return out;
}

JointDesign build_joint_design(const BiprobitSpec& spec, const Dataset& ds) {
    spec.validate();
    check_variables_known(ds, spec.eq1);
    check_variables_known(ds, spec.eq2);
    JointDesign out;
    for (size_t i = 0; i < ds.records.size(); ++i) {
        const auto& rec = ds.records[i];
        if (row_complete(ds, rec, spec.eq1) && row_complete(ds, rec, spec.eq2)) {
            out.rows.push_back(i);
        }
    }
    if (out.rows.empty()) throw DataError("no complete rows for the joint model");
    const auto n = static_cast<Eigen::Index>(out.rows.size());
    out.X1.resize(n, static_cast<Eigen::Index>(spec.eq1.regressors.size() + 1));
    out.X2.resize(n, static_cast<Eigen::Index>(spec.eq2.regressors.size() + 1));
    out.y1.resize(n);
    out.y2.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& rec = ds.records[out.rows[static_cast<size_t>(i)]];
        fill_row(ds, rec, spec.eq1, out.X1, out.y1, i);
        fill_row(ds, rec, spec.eq2, out.X2, out.y2, i);
    }
    out.names1 = column_names(spec.eq1);
    out.names2 = column_names(spec.eq2);
    return out;
}

}  // namespace dualcv
