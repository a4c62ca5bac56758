#include "dualcv/data.hpp"

#include "dualcv/errors.hpp"
#include "dualcv/stats.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace dualcv {

namespace {

using ordered_json = nlohmann::ordered_json;

bool is_missing_token(const std::string& s) {
    return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == ".";
}

double parse_number(const std::string& cell, size_t row, const std::string& col) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end) {
        throw DataError("row " + std::to_string(row) + ", column '" + col +
                        "': non-numeric value '" + cell + "'");
    }
    return out;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Splits one CSV line; supports double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

ColumnRole parse_role(const std::string& s) {
    if (s == "id") return ColumnRole::Id;
    if (s == "outcome") return ColumnRole::Outcome;
    if (s == "bid") return ColumnRole::Bid;
    if (s == "open_ended") return ColumnRole::OpenEnded;
    if (s == "covariate") return ColumnRole::Covariate;
    if (s == "wage") return ColumnRole::Wage;
    if (s == "passthrough") return ColumnRole::Passthrough;
    throw DataError("schema: unknown column role '" + s + "'");
}

bool close_to_any(double x, const std::vector<double>& xs) {
    for (double v : xs) {
        if (std::fabs(x - v) <= 1e-9 * std::max(1.0, std::fabs(v))) return true;
    }
    return false;
}

}  // namespace

void BidDesign::validate() const {
    auto check = [](const std::vector<double>& bids, const std::string& label) {
        if (bids.empty()) throw DataError("bid design: " + label + " bid set is empty");
        double prev = 0.0;
        for (double b : bids) {
            if (!(b > 0.0)) throw DataError("bid design: " + label + " bids must be positive");
            if (!(b > prev)) {
                throw DataError("bid design: " + label + " bids must be strictly increasing");
            }
            prev = b;
        }
    };
    check(cash_bids, "cash");
    check(labor_bids, "labor");
}

bool BidDesign::has_cash(double bid) const { return close_to_any(bid, cash_bids); }
bool BidDesign::has_labor(double bid) const { return close_to_any(bid, labor_bids); }

SchemaConfig SchemaConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

SchemaConfig SchemaConfig::from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw DataError(std::string("schema: invalid JSON: ") + e.what());
    }
    if (!j.contains("columns") || !j["columns"].is_object()) {
        throw DataError("schema: missing 'columns' object");
    }
    SchemaConfig cfg;
    for (auto& [name, spec] : j["columns"].items()) {
        ColumnSpec cs;
        cs.role = parse_role(spec.value("role", std::string("covariate")));
        cs.vehicle = spec.value("vehicle", std::string());
        cs.season = spec.value("season", std::string());
        const std::string kind = spec.value("kind", std::string("continuous"));
        if (kind == "dummy") {
            cs.kind = VariableKind::Dummy;
        } else if (kind == "continuous") {
            cs.kind = VariableKind::Continuous;
        } else {
            throw DataError("schema: column '" + name + "': unknown kind '" + kind + "'");
        }
        cs.scale = spec.value("scale", 1.0);
        cs.description = spec.value("description", std::string());
        if (cs.role == ColumnRole::Outcome || cs.role == ColumnRole::Bid ||
            cs.role == ColumnRole::OpenEnded) {
            if (cs.vehicle != "cash" && cs.vehicle != "labor") {
                throw DataError("schema: column '" + name +
                                "': role requires vehicle 'cash' or 'labor'");
            }
        }
        if (cs.role == ColumnRole::Wage && cs.season != "slack" && cs.season != "peak") {
            throw DataError("schema: column '" + name + "': wage requires season 'slack' or 'peak'");
        }
        cfg.columns.emplace(name, cs);
    }
    if (j.contains("bid_design")) {
        BidDesign design;
        design.cash_bids = j["bid_design"].value("cash", std::vector<double>{});
        design.labor_bids = j["bid_design"].value("labor", std::vector<double>{});
        design.validate();
        cfg.bid_design = design;
    }

    // Exactly one column per required role.
    auto count_role = [&](ColumnRole role, const std::string& vehicle) {
        size_t c = 0;
        for (const auto& [name, cs] : cfg.columns) {
            if (cs.role == role && (vehicle.empty() || cs.vehicle == vehicle)) ++c;
        }
        return c;
    };
    for (const std::string v : {"cash", "labor"}) {
        if (count_role(ColumnRole::Outcome, v) != 1) {
            throw DataError("schema: exactly one outcome column with vehicle '" + v + "' required");
        }
        if (count_role(ColumnRole::Bid, v) != 1) {
            throw DataError("schema: exactly one bid column with vehicle '" + v + "' required");
        }
    }
    return cfg;
}

std::optional<double> Dataset::value(const SurveyRecord& rec, const std::string& name) const {
    auto it = columns.find(name);
    if (it == columns.end()) return std::nullopt;
    const ColumnSpec& cs = it->second;
    switch (cs.role) {
        case ColumnRole::Outcome:
            return cs.vehicle == "cash" ? double(rec.y1) : double(rec.y2);
        case ColumnRole::Bid:
            return cs.vehicle == "cash" ? rec.bid_cash : rec.bid_labor;
        case ColumnRole::OpenEnded:
            return cs.vehicle == "cash" ? rec.max_wtp : rec.max_wtc;
        case ColumnRole::Wage:
            return cs.season == "slack" ? rec.wage_slack : rec.wage_peak;
        case ColumnRole::Covariate: {
            auto cit = rec.covariates.find(name);
            if (cit == rec.covariates.end() || std::isnan(cit->second)) return std::nullopt;
            return cit->second;
        }
        default:
            return std::nullopt;
    }
}

std::optional<std::string> Dataset::bid_column(const std::string& vehicle) const {
    for (const auto& [name, cs] : columns) {
        if (cs.role == ColumnRole::Bid && cs.vehicle == vehicle) return name;
    }
    return std::nullopt;
}

LoadResult load_csv_text(const std::string& text, const SchemaConfig& schema,
                         const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DataError(origin + ": empty file");
    // Strip a UTF-8 BOM if present.
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line = line.substr(3);
    const std::vector<std::string> header = split_csv_line(line);

    std::map<std::string, size_t> col_index;
    for (size_t i = 0; i < header.size(); ++i) col_index[header[i]] = i;
    for (const auto& [name, cs] : schema.columns) {
        (void)cs;
        if (!col_index.count(name)) {
            throw DataError(origin + ": schema column '" + name + "' not found in CSV header");
        }
    }

    LoadResult out;
    out.dataset.columns = schema.columns;
    out.dataset.bid_design = schema.bid_design;
    for (const auto& [name, cs] : schema.columns) {
        VariableMeta meta;
        meta.description = cs.description;
        meta.kind = (cs.role == ColumnRole::Outcome) ? VariableKind::Dummy
                    : (cs.role == ColumnRole::Covariate) ? cs.kind
                                                         : VariableKind::Continuous;
        if (cs.role != ColumnRole::Id && cs.role != ColumnRole::Passthrough) {
            out.dataset.variable_meta.emplace(name, meta);
        }
    }

    size_t row = 1;  // header was row 1
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw DataError(origin + ": row " + std::to_string(row) + ": expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()));
        }
        SurveyRecord rec;
        rec.id = std::to_string(out.dataset.records.size() + 1);
        for (const auto& [name, cs] : schema.columns) {
            const std::string& cell = cells[col_index[name]];
            const bool missing = is_missing_token(cell);
            if (missing && cs.role != ColumnRole::Id && cs.role != ColumnRole::Passthrough) {
                ++out.report.missing_counts[name];
            }
            switch (cs.role) {
                case ColumnRole::Id:
                    if (!missing) rec.id = cell;
                    break;
                case ColumnRole::Passthrough:
                    rec.passthrough[name] = cell;
                    break;
                case ColumnRole::Outcome: {
                    if (missing) {
                        throw DataError(origin + ": row " + std::to_string(row) + ", column '" +
                                        name + "': outcome is missing");
                    }
                    const double v = parse_number(cell, row, name);
                    if (v != 0.0 && v != 1.0) {
                        throw DataError(origin + ": row " + std::to_string(row) + ", column '" +
                                        name + "': outcome must be 0 or 1, got '" + cell + "'");
                    }
                    (cs.vehicle == "cash" ? rec.y1 : rec.y2) = static_cast<int>(v);
                    break;
                }
                case ColumnRole::Bid: {
                    if (missing) {
                        throw DataError(origin + ": row " + std::to_string(row) + ", column '" +
                                        name + "': bid is missing");
                    }
                    const double v = parse_number(cell, row, name);
                    (cs.vehicle == "cash" ? rec.bid_cash : rec.bid_labor) = v;
                    break;
                }
                case ColumnRole::OpenEnded: {
                    if (missing) break;
                    const double v = parse_number(cell, row, name);
                    if (v < 0.0) {
                        throw DataError(origin + ": row " + std::to_string(row) + ", column '" +
                                        name + "': open-ended maximum must be >= 0");
                    }
                    (cs.vehicle == "cash" ? rec.max_wtp : rec.max_wtc) = v;
                    break;
                }
                case ColumnRole::Wage: {
                    if (missing) break;
                    const double v = parse_number(cell, row, name);
                    (cs.season == "slack" ? rec.wage_slack : rec.wage_peak) = v;
                    break;
                }
                case ColumnRole::Covariate: {
                    if (missing) {
                        rec.covariates[name] = std::numeric_limits<double>::quiet_NaN();
                        break;
                    }
                    double v = parse_number(cell, row, name);
                    if (cs.kind == VariableKind::Dummy && v != 0.0 && v != 1.0) {
                        throw DataError(origin + ": row " + std::to_string(row) + ", column '" +
                                        name + "': dummy variable must be 0 or 1, got '" + cell +
                                        "'");
                    }
                    rec.covariates[name] = v * cs.scale;
                    break;
                }
            }
        }
        if (out.dataset.bid_design) {
            if (!out.dataset.bid_design->has_cash(rec.bid_cash)) {
                out.report.warnings.push_back("row " + std::to_string(row) + ": cash bid " +
                                              std::to_string(rec.bid_cash) + " not in design");
            }
            if (!out.dataset.bid_design->has_labor(rec.bid_labor)) {
                out.report.warnings.push_back("row " + std::to_string(row) + ": labor bid " +
                                              std::to_string(rec.bid_labor) + " not in design");
            }
        }
        out.dataset.records.push_back(std::move(rec));
        ++out.report.rows_read;
    }
    if (out.dataset.records.empty()) throw DataError(origin + ": no data rows");
    return out;
}

LoadResult load_csv(const std::string& path, const SchemaConfig& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_csv_text(ss.str(), schema, path);
}

namespace {

std::string format_cell(double v) {
    // Shortest representation that round-trips exactly.
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

std::string write_csv(const Dataset& ds) {
    std::ostringstream out;
    bool first = true;
    for (const auto& [name, cs] : ds.columns) {
        (void)cs;
        if (!first) out << ',';
        out << name;
        first = false;
    }
    out << '\n';
    for (const auto& rec : ds.records) {
        first = true;
        for (const auto& [name, cs] : ds.columns) {
            if (!first) out << ',';
            first = false;
            switch (cs.role) {
                case ColumnRole::Id:
                    out << rec.id;
                    break;
                case ColumnRole::Passthrough: {
                    auto it = rec.passthrough.find(name);
                    if (it != rec.passthrough.end()) out << it->second;
                    break;
                }
                case ColumnRole::Outcome:
                    out << (cs.vehicle == "cash" ? rec.y1 : rec.y2);
                    break;
                case ColumnRole::Bid:
                    out << format_cell(cs.vehicle == "cash" ? rec.bid_cash : rec.bid_labor);
                    break;
                case ColumnRole::OpenEnded: {
                    const auto& v = cs.vehicle == "cash" ? rec.max_wtp : rec.max_wtc;
                    if (v) out << format_cell(*v);
                    break;
                }
                case ColumnRole::Wage: {
                    const auto& v = cs.season == "slack" ? rec.wage_slack : rec.wage_peak;
                    if (v) out << format_cell(*v);
                    break;
                }
                case ColumnRole::Covariate: {
                    auto it = rec.covariates.find(name);
                    if (it != rec.covariates.end() && !std::isnan(it->second)) {
                        // Cells are stored scaled; write back the raw value.
                        out << format_cell(it->second / cs.scale);
                    }
                    break;
                }
            }
        }
        out << '\n';
    }
    return out.str();
}

void write_csv_file(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open output file: " + path);
    out << write_csv(ds);
}

std::pair<Dataset, std::vector<Exclusion>> consistency_filter(const Dataset& ds) {
    Dataset kept = ds;
    kept.records.clear();
    std::vector<Exclusion> removed;
    for (const auto& rec : ds.records) {
        if (rec.y1 == 1 && rec.max_wtp && *rec.max_wtp < rec.bid_cash) {
            removed.push_back({rec.id, "open-ended WTP below accepted cash bid", rec.bid_cash,
                               *rec.max_wtp});
            continue;
        }
        if (rec.y2 == 1 && rec.max_wtc && *rec.max_wtc < rec.bid_labor) {
            removed.push_back({rec.id, "open-ended WTC below accepted labor bid", rec.bid_labor,
                               *rec.max_wtc});
            continue;
        }
        kept.records.push_back(rec);
    }
    return {std::move(kept), std::move(removed)};
}

std::vector<VariableSummary> summarize(const Dataset& ds) {
    if (ds.records.empty()) throw DataError("summarize: empty dataset");
    std::vector<VariableSummary> out;
    for (const auto& [name, meta] : ds.variable_meta) {
        VariableSummary s;
        s.name = name;
        s.kind = meta.kind;
        std::vector<double> vals;
        vals.reserve(ds.records.size());
        for (const auto& rec : ds.records) {
            if (auto v = ds.value(rec, name)) vals.push_back(*v);
        }
        s.n = vals.size();
        if (!vals.empty()) {
            s.mean = mean(vals);
            s.sd = sample_sd(vals);
            if (meta.kind == VariableKind::Dummy) s.share = s.mean;
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace dualcv
