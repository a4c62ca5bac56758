#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dualcv {

enum class VariableKind { Continuous, Dummy };

struct VariableMeta {
    VariableKind kind = VariableKind::Continuous;
    std::string description;
};

// One respondent: dichotomous-choice responses for the cash and labor bids,
// open-ended follow-up maxima, covariates, and seasonal wages.
struct SurveyRecord {
    std::string id;
    double bid_cash = 0.0;  // ETB/year/kada
    double bid_labor = 0.0; // days/month/kada
    int y1 = 0;             // accepted cash bid
    int y2 = 0;             // accepted labor bid
    std::optional<double> max_wtp;  // ETB/year
    std::optional<double> max_wtc;  // days/month
    std::map<std::string, double> covariates;  // NaN marks a missing cell
    std::optional<double> wage_slack;  // ETB/day
    std::optional<double> wage_peak;   // ETB/day
    std::map<std::string, std::string> passthrough;  // untyped columns kept verbatim
};

struct BidDesign {
    std::vector<double> cash_bids;
    std::vector<double> labor_bids;

    // Enforces strictly positive, strictly increasing, nonempty bid sets.
    void validate() const;
    bool has_cash(double bid) const;
    bool has_labor(double bid) const;
};

enum class ColumnRole { Id, Outcome, Bid, OpenEnded, Covariate, Wage, Passthrough };

struct ColumnSpec {
    ColumnRole role = ColumnRole::Covariate;
    std::string vehicle;  // "cash" | "labor" for outcome/bid/open_ended
    std::string season;   // "slack" | "peak" for wage
    VariableKind kind = VariableKind::Continuous;
    double scale = 1.0;   // multiplies covariate cells on load
    std::string description;
};

// Parsed schema configuration: column roles plus the optional bid design.
struct SchemaConfig {
    std::map<std::string, ColumnSpec> columns;  // keyed by CSV header name
    std::optional<BidDesign> bid_design;

    static SchemaConfig from_json_file(const std::string& path);
    static SchemaConfig from_json_text(const std::string& text);
};

struct Dataset {
    std::vector<SurveyRecord> records;
    std::map<std::string, VariableMeta> variable_meta;  // every mapped column
    std::map<std::string, ColumnSpec> columns;          // schema echo, keyed by name
    std::optional<BidDesign> bid_design;

    size_t n() const { return records.size(); }

    // Value of a named variable for a record: resolves outcome/bid/wage roles
    // as well as covariates. Returns nullopt when missing.
    std::optional<double> value(const SurveyRecord& rec, const std::string& name) const;

    // Name of the bid column for a vehicle ("cash" or "labor"), if mapped.
    std::optional<std::string> bid_column(const std::string& vehicle) const;
};

struct LoadReport {
    size_t rows_read = 0;
    std::map<std::string, size_t> missing_counts;
    std::vector<std::string> warnings;  // e.g. off-design bids
};

struct LoadResult {
    Dataset dataset;
    LoadReport report;
};

// Reads a CSV with a header row under the given schema. Throws DataError on
// parse failures, unmapped required roles, or domain violations, naming the
// offending row and column.
LoadResult load_csv(const std::string& path, const SchemaConfig& schema);
LoadResult load_csv_text(const std::string& text, const SchemaConfig& schema,
                         const std::string& origin = "<memory>");

// Writes records back out under the same schema; load -> write -> load
// round-trips to an identical dataset.
std::string write_csv(const Dataset& ds);
void write_csv_file(const Dataset& ds, const std::string& path);

// One removed record: which rule fired and the values behind it.
struct Exclusion {
    std::string id;
    std::string rule;
    double bid = 0.0;
    double stated_max = 0.0;
};

// Removes responses whose open-ended follow-up undercuts an accepted bid:
// (y1=1 and max_wtp < bid_cash) or (y2=1 and max_wtc < bid_labor).
// Records with missing open-ended values are retained.
std::pair<Dataset, std::vector<Exclusion>> consistency_filter(const Dataset& ds);

struct VariableSummary {
    std::string name;
    VariableKind kind = VariableKind::Continuous;
    size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;     // sample sd, n-1 denominator
    double share = 0.0;  // share of ones, dummies only
};

std::vector<VariableSummary> summarize(const Dataset& ds);

}  // namespace dualcv
