// Command-line driver: fit, welfare, diagnose, simulate, report.

#include "dualcv/biprobit.hpp"
#include "dualcv/data.hpp"
#include "dualcv/diagnostics.hpp"
#include "dualcv/effects.hpp"
#include "dualcv/errors.hpp"
#include "dualcv/probit.hpp"
#include "dualcv/serialize.hpp"
#include "dualcv/simulate.hpp"
#include "dualcv/table.hpp"
#include "dualcv/welfare.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace {

using dualcv::ordered_json;

constexpr std::uint64_t kDefaultSeed = 42;

int fail(const std::string& msg) {
    std::cerr << msg << '\n';
    return 1;
}

bool write_payload(const std::string& out_path, const std::string& payload) {
    if (out_path.empty()) {
        std::cout << payload;
        return true;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
        std::cerr << "out: cannot open '" << out_path << "'\n";
        return false;
    }
    f << payload;
    return true;
}

struct CommonArgs {
    std::string data_path, schema_path, spec_path, out_path;
    std::string format = "json";
    std::uint64_t seed = kDefaultSeed;
    int threads = 1;
    bool no_filter = false;
};

// Loads data + schema, applies the consistency filter unless disabled.
dualcv::Dataset load_dataset(const CommonArgs& args, ordered_json* filter_block) {
    const auto schema = dualcv::SchemaConfig::from_json_file(args.schema_path);
    auto loaded = dualcv::load_csv(args.data_path, schema);
    if (args.no_filter) {
        if (filter_block) {
            (*filter_block)["applied"] = false;
            (*filter_block)["load"] = to_json(loaded.report);
        }
        return std::move(loaded.dataset);
    }
    auto [kept, removed] = dualcv::consistency_filter(loaded.dataset);
    if (filter_block) {
        (*filter_block)["applied"] = true;
        (*filter_block)["rows_read"] = loaded.report.rows_read;
        (*filter_block)["excluded"] = removed.size();
        (*filter_block)["retained"] = kept.n();
        (*filter_block)["exclusions"] = to_json(removed);
        (*filter_block)["load"] = to_json(loaded.report);
    }
    return std::move(kept);
}

int cmd_fit(const CommonArgs& args, const std::string& model, bool with_ame) {
    if (args.data_path.empty()) return fail("data: required");
    if (args.schema_path.empty()) return fail("schema: required");
    if (args.spec_path.empty()) return fail("spec: required");
    if (model != "probit" && model != "biprobit") return fail("model: must be probit or biprobit");
    if (args.format != "json" && args.format != "text") {
        return fail("format: must be json or text for fit");
    }

    ordered_json filter_block;
    const auto spec = dualcv::BiprobitSpec::from_json_file(args.spec_path);
    const auto ds = load_dataset(args, &filter_block);

    const dualcv::FitResult f1 = dualcv::fit_probit(spec.eq1, ds);
    const dualcv::FitResult f2 = dualcv::fit_probit(spec.eq2, ds);

    ordered_json out;
    out["model"] = model;
    int code = 0;
    if (model == "probit") {
        out["eq1"] = to_json(f1);
        out["eq2"] = to_json(f2);
        out["filter"] = filter_block;
        if (args.format == "text") {
            std::ostringstream txt;
            txt << "Univariate probit, eq1 (cash)\n" << to_json(f1).dump(2)
                << "\n\nUnivariate probit, eq2 (labor)\n" << to_json(f2).dump(2) << '\n';
            return write_payload(args.out_path, txt.str()) ? 0 : 1;
        }
        return write_payload(args.out_path, out.dump(2) + "\n") ? 0 : 1;
    }

    const dualcv::BiprobitFit joint = dualcv::fit_biprobit(spec, ds);
    std::optional<dualcv::TestResult> lr;
    std::optional<dualcv::ExogeneityReport> exog;
    if (joint.converged) {
        lr = dualcv::lr_test_rho(joint, f1, f2);
        exog = dualcv::exogeneity_diagnostic(f2, joint, spec.eq1.outcome);
    } else {
        code = 2;
        std::cerr << "fit: joint model did not converge in " << joint.iterations
                  << " iterations\n";
    }
    if (!joint.exclusion_ok) {
        std::cerr << "fit: no exclusion restriction; identification rests on functional form\n";
    }

    if (args.format == "text") {
        const std::string txt =
            dualcv::fit_table(f1, f2, joint, lr, exog) +
            (with_ame && joint.converged
                 ? "\nAverage marginal effects, eq2 (labor)\n" +
                       dualcv::ame_report(dualcv::ame(joint, spec, ds, 2))
                 : "");
        return write_payload(args.out_path, txt) && code == 0 ? code : (code ? code : 1);
    }

    out["univariate"] = {{"eq1", to_json(f1)}, {"eq2", to_json(f2)}};
    out["joint"] = to_json(joint);
    if (lr) out["lr_test"] = to_json(*lr);
    if (exog) out["exogeneity"] = to_json(*exog);
    if (with_ame && joint.converged) {
        out["ame"] = {{"eq1", to_json(dualcv::ame(joint, spec, ds, 1))},
                      {"eq2", to_json(dualcv::ame(joint, spec, ds, 2))}};
    }
    out["filter"] = filter_block;
    if (!write_payload(args.out_path, out.dump(2) + "\n")) return 1;
    return code;
}

int cmd_welfare(const CommonArgs& args, const std::string& fit_path,
                const dualcv::WelfareOptions& wopts) {
    if (args.data_path.empty()) return fail("data: required");
    if (args.schema_path.empty()) return fail("schema: required");
    if (args.spec_path.empty()) return fail("spec: required");

    const auto spec = dualcv::BiprobitSpec::from_json_file(args.spec_path);
    const auto ds = load_dataset(args, nullptr);

    dualcv::BiprobitFit fit;
    if (!fit_path.empty()) {
        std::ifstream f(fit_path);
        if (!f) return fail("fit: cannot open '" + fit_path + "'");
        ordered_json j = ordered_json::parse(f, nullptr, false);
        if (j.is_discarded()) return fail("fit: invalid JSON in '" + fit_path + "'");
        fit = dualcv::biprobit_from_json(j.contains("joint") ? j["joint"] : j);
    } else {
        fit = dualcv::fit_biprobit(spec, ds);
        if (!fit.converged) {
            std::cerr << "welfare: joint model did not converge\n";
            return 2;
        }
    }

    const dualcv::WelfareReport rep = dualcv::welfare_report(fit, spec, ds, wopts);
    if (args.format == "text") {
        return write_payload(args.out_path, dualcv::welfare_table(rep)) ? 0 : 1;
    }
    if (args.format == "csv") {
        std::ostringstream csv;
        csv << "id,cv_money,cv_labor,cv_labor_annual_days,mean_w,cv_total\n";
        for (const auto& r : rep.per_respondent) {
            csv << r.id << ',' << r.cv_money << ',' << r.cv_labor << ','
                << r.cv_labor_annual_days << ',' << r.mean_w << ',' << r.cv_total << '\n';
        }
        return write_payload(args.out_path, csv.str()) ? 0 : 1;
    }
    return write_payload(args.out_path, to_json(rep).dump(2) + "\n") ? 0 : 1;
}

int cmd_diagnose(const CommonArgs& args, const std::string& vehicle,
                 const std::vector<std::string>& endowment_vars,
                 const std::string& active_labor) {
    if (args.data_path.empty()) return fail("data: required");
    if (args.schema_path.empty()) return fail("schema: required");

    auto ds = load_dataset(args, nullptr);
    std::vector<std::string> endow = endowment_vars;
    ordered_json meta = ordered_json::object();
    if (!active_labor.empty()) {
        const auto sep = active_labor.find(':');
        if (sep == std::string::npos) {
            return fail("active-labor: expected WORKING_COL:DEPENDENTS_COL");
        }
        ds = dualcv::with_active_labor(ds, active_labor.substr(0, sep),
                                       active_labor.substr(sep + 1));
        meta["active_labor_formula"] = dualcv::kActiveLaborFormula;
        endow.push_back("active_labor");
    }

    const dualcv::PatternShares shares = dualcv::response_pattern_shares(ds);
    std::vector<dualcv::AnchoringResult> anchoring;
    std::vector<std::string> skipped;
    const std::vector<std::string> vehicles =
        vehicle == "all" ? std::vector<std::string>{"cash", "labor", "cross"}
                         : std::vector<std::string>{vehicle};
    for (const auto& v : vehicles) {
        try {
            anchoring.push_back(dualcv::anchoring_test(ds, v));
        } catch (const dualcv::DataError& e) {
            skipped.push_back(e.what());
        }
    }
    std::vector<dualcv::EndowmentResult> endowment;
    for (const auto& var : endow) {
        endowment.push_back(dualcv::endowment_comparison(ds, var));
    }

    if (args.format == "text") {
        return write_payload(args.out_path,
                             dualcv::diagnostics_table(anchoring, endowment, shares))
                   ? 0
                   : 1;
    }
    if (args.format == "csv") {
        // Group means/CIs for external plotting.
        std::ostringstream csv;
        csv << "vehicle,bid,n,mean,ci_low,ci_high\n";
        for (const auto& a : anchoring) {
            for (const auto& g : a.groups) {
                csv << a.vehicle << ',' << g.bid << ',' << g.n << ',' << g.mean << ','
                    << g.ci_low << ',' << g.ci_high << '\n';
            }
        }
        return write_payload(args.out_path, csv.str()) ? 0 : 1;
    }
    ordered_json out;
    out["response_patterns"] = to_json(shares);
    ordered_json anch = ordered_json::array();
    for (const auto& a : anchoring) anch.push_back(to_json(a));
    out["anchoring"] = std::move(anch);
    ordered_json endw = ordered_json::array();
    for (const auto& e : endowment) endw.push_back(to_json(e));
    out["endowment"] = std::move(endw);
    if (!skipped.empty()) out["skipped"] = skipped;
    if (!meta.empty()) out["metadata"] = meta;
    return write_payload(args.out_path, out.dump(2) + "\n") ? 0 : 1;
}

int cmd_simulate(const CommonArgs& args, const std::string& config_path, bool paper_like,
                 size_t reps, bool fit_both, bool seed_given, const std::string& emit_data) {
    dualcv::DgpConfig cfg;
    if (!config_path.empty()) {
        cfg = dualcv::DgpConfig::from_json_file(config_path);
    } else if (paper_like) {
        cfg = dualcv::paper_like_config();
    } else {
        return fail("config: required (or pass --paper-like)");
    }
    if (seed_given) cfg.seed = args.seed;
    if (reps < 1) return fail("reps: must be at least 1");

    if (!emit_data.empty()) {
        dualcv::write_csv_file(dualcv::generate(cfg, 0), emit_data);
    }
    const dualcv::McResult res = dualcv::monte_carlo(cfg, reps, fit_both, args.threads);
    if (args.format == "text") {
        return write_payload(args.out_path, dualcv::mc_table(res)) ? 0 : 1;
    }
    return write_payload(args.out_path, to_json(res).dump(2) + "\n") ? 0 : 1;
}

// Missing keys and JSON nulls (non-finite numbers) both map to the default.
double numval(const ordered_json& j, const std::string& key, double def) {
    if (!j.contains(key) || !j[key].is_number()) return def;
    return j[key].get<double>();
}

// Re-renders a JSON artifact as text; artifact type is sniffed from keys.
int cmd_report(const std::string& in_path, const std::string& out_path) {
    if (in_path.empty()) return fail("in: required");
    std::ifstream f(in_path);
    if (!f) return fail("in: cannot open '" + in_path + "'");
    ordered_json j = ordered_json::parse(f, nullptr, false);
    if (j.is_discarded()) return fail("in: invalid JSON in '" + in_path + "'");

    std::ostringstream out;
    if (j.contains("params") && j.contains("replications")) {
        dualcv::McResult r;
        r.replications = j.value("replications", size_t{0});
        r.failures = j.value("failures", size_t{0});
        r.failure_rate = j.value("failure_rate", 0.0);
        r.n = j.value("n", size_t{0});
        r.seed = j.value("seed", std::uint64_t{0});
        r.lr_rejection_rate = numval(j, "lr_rejection_rate", 0.0);
        r.eta_univ_mean_bias = numval(j, "eta_univ_mean_bias", 0.0);
        r.eta_flip_or_insig_rate = numval(j, "eta_flip_or_insig_rate", 0.0);
        r.eta_joint_coverage = numval(j, "eta_joint_coverage", 0.0);
        for (const auto& p : j["params"]) {
            dualcv::ParamStat ps;
            ps.equation = p.value("equation", std::string());
            ps.name = p.value("name", std::string());
            ps.truth = numval(p, "truth", 0.0);
            ps.mean_est = numval(p, "mean_est", 0.0);
            ps.bias = numval(p, "bias", 0.0);
            ps.rmse = numval(p, "rmse", 0.0);
            ps.ci_coverage = numval(p, "ci_coverage", 0.0);
            r.params.push_back(std::move(ps));
        }
        out << dualcv::mc_table(r);
    } else if (j.contains("summary") && j.contains("shadow_wage")) {
        dualcv::WelfareReport rep;
        rep.n = j.value("n", size_t{0});
        rep.wage_mode = j.value("wage_mode", std::string());
        rep.truncated = j.value("truncate_negative", false);
        const auto& sw = j["shadow_wage"];
        rep.reference_wage.ratio = sw.value("ratio", 0.3863);
        rep.reference_wage.lower = sw.value("lower", 0.0);
        rep.reference_wage.upper = sw.value("upper", 0.0);
        rep.reference_wage.mean_w = sw.value("mean_w", 0.0);
        const auto& s = j["summary"];
        rep.mean_cv_money = s["cv_money"].value("mean", 0.0);
        rep.sd_cv_money = s["cv_money"].value("sd", 0.0);
        rep.mean_cv_labor = s["cv_labor_monthly"].value("mean", 0.0);
        rep.sd_cv_labor = s["cv_labor_monthly"].value("sd", 0.0);
        rep.mean_annual_days = s["cv_labor_annual_days"].value("mean", 0.0);
        rep.sd_annual_days = s["cv_labor_annual_days"].value("sd", 0.0);
        rep.mean_labor_value_slack = s.value("labor_value_slack", 0.0);
        rep.mean_labor_value_peak = s.value("labor_value_peak", 0.0);
        rep.mean_labor_value = s.value("labor_value", 0.0);
        rep.mean_cv_total = s["cv_total"].value("mean", 0.0);
        rep.sd_cv_total = s["cv_total"].value("sd", 0.0);
        rep.cash_share = s.value("cash_share", 0.0);
        out << dualcv::welfare_table(rep);
    } else if (j.contains("joint") || (j.contains("eq1") && j.contains("athrho"))) {
        const ordered_json& jj = j.contains("joint") ? j["joint"] : j;
        auto tcol = [&](const ordered_json& v) {
            const double t = numval(v, "t", std::numeric_limits<double>::quiet_NaN());
            char buf[16];
            if (std::isfinite(t)) {
                std::snprintf(buf, sizeof(buf), "%8.2f", t);
            } else {
                std::snprintf(buf, sizeof(buf), "%8s", ".");
            }
            return std::string(buf);
        };
        auto print_block = [&](const std::string& label, const ordered_json& block) {
            out << label << '\n';
            for (const auto& [name, v] : block.items()) {
                char buf[96];
                std::snprintf(buf, sizeof(buf), "  %-22s %10.2f %s\n", name.c_str(),
                              numval(v, "est", 0.0), tcol(v).c_str());
                out << buf;
            }
        };
        out << "Joint probit fit (n = " << jj.value("n", size_t{0}) << ")\n";
        out << "Variable                         Coef.        t\n";
        out << std::string(49, '-') << '\n';
        print_block("Equation y2 (labor)", jj["eq2"]);
        print_block("Equation y1 (cash)", jj["eq1"]);
        char buf[96];
        std::snprintf(buf, sizeof(buf), "  %-22s %10.2f %s\n", "athrho",
                      numval(jj["athrho"], "est", 0.0), tcol(jj["athrho"]).c_str());
        out << buf;
        std::snprintf(buf, sizeof(buf), "  %-22s %10.2f\n", "rho", numval(jj, "rho", 0.0));
        out << buf;
        std::snprintf(buf, sizeof(buf), "Log likelihood %.2f\n", numval(jj, "loglik", 0.0));
        out << buf;
        if (j.contains("lr_test")) {
            std::snprintf(buf, sizeof(buf), "LR test of rho = 0: chi2(1) = %.3f, p = %.4f\n",
                          numval(j["lr_test"], "statistic", 0.0), numval(j["lr_test"], "p", 1.0));
            out << buf;
        }
    } else {
        return fail("in: unrecognized artifact type");
    }
    return write_payload(out_path, out.str()) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dual payment-vehicle contingent valuation toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string model = "biprobit";
    bool with_ame = false;
    std::string fit_path;
    std::string vehicle = "all";
    std::vector<std::string> endowment_vars;
    std::string active_labor;
    std::string config_path;
    bool paper_like = false;
    size_t reps = 1;
    bool no_fit_both = false;
    std::string emit_data;
    std::string in_path;
    dualcv::WelfareOptions wopts;
    std::string wage_mode = "respondent";
    double wage_slack = 0.0, wage_peak = 0.0;

    auto add_common = [&](CLI::App* cmd, bool with_spec) {
        cmd->add_option("--data", args.data_path, "input CSV");
        cmd->add_option("--schema", args.schema_path, "schema JSON");
        if (with_spec) cmd->add_option("--spec", args.spec_path, "model spec JSON");
        cmd->add_option("--out", args.out_path, "output path (default stdout)");
        cmd->add_option("--format", args.format, "json|text|csv");
        cmd->add_option("--seed", args.seed, "random seed");
        cmd->add_option("--threads", args.threads, "max worker threads");
        cmd->add_flag("--no-filter", args.no_filter, "skip the consistency filter");
    };

    CLI::App* fit = app.add_subcommand("fit", "estimate probit / joint probit models");
    add_common(fit, true);
    fit->add_option("--model", model, "probit|biprobit");
    fit->add_flag("--ame", with_ame, "include average marginal effects");

    CLI::App* welfare = app.add_subcommand("welfare", "compensating-surplus welfare report");
    add_common(welfare, true);
    welfare->add_option("--fit", fit_path, "existing fit artifact (skips refitting)");
    welfare->add_option("--shadow-ratio", wopts.shadow_ratio, "shadow wage ratio");
    welfare->add_option("--wage-mode", wage_mode, "respondent|global");
    welfare->add_flag("--truncate-negative", wopts.truncate_negative,
                      "clamp negative CVs at zero");
    welfare->add_option("--sim-draws", wopts.sim_draws,
                        "simulation draws for CIs (0 = off)");
    welfare->add_option("--wage-slack", wage_slack, "override slack wage (ETB/day)");
    welfare->add_option("--wage-peak", wage_peak, "override peak wage (ETB/day)");

    CLI::App* diagnose = app.add_subcommand("diagnose", "behavioral-anomaly diagnostics");
    add_common(diagnose, false);
    diagnose->add_option("--vehicle", vehicle, "cash|labor|cross|all");
    diagnose->add_option("--endowment", endowment_vars, "variable for group comparisons");
    diagnose->add_option("--active-labor", active_labor,
                         "derive active labor as WORKING_COL:DEPENDENTS_COL");

    CLI::App* simulate = app.add_subcommand("simulate", "synthetic-data Monte Carlo");
    add_common(simulate, false);
    simulate->add_option("--config", config_path, "DGP config JSON");
    simulate->add_flag("--paper-like", paper_like, "use the built-in calibration");
    simulate->add_option("--reps", reps, "replications");
    simulate->add_flag("--no-fit-both", no_fit_both, "skip the univariate-pair bookkeeping");
    simulate->add_option("--emit-data", emit_data, "write replication 0 as CSV");

    CLI::App* report = app.add_subcommand("report", "render a JSON artifact as text");
    report->add_option("--in", in_path, "artifact JSON");
    report->add_option("--out", args.out_path, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "args: " << e.what() << '\n';
        return 1;
    }

    try {
        if (fit->parsed()) return cmd_fit(args, model, with_ame);
        if (welfare->parsed()) {
            if (wage_mode == "global") {
                wopts.wage_mode = dualcv::WelfareOptions::WageMode::Global;
            } else if (wage_mode != "respondent") {
                return fail("wage-mode: must be respondent or global");
            }
            wopts.seed = args.seed;
            if (wage_slack > 0.0) wopts.wage_slack = wage_slack;
            if (wage_peak > 0.0) wopts.wage_peak = wage_peak;
            return cmd_welfare(args, fit_path, wopts);
        }
        if (diagnose->parsed()) {
            return cmd_diagnose(args, vehicle, endowment_vars, active_labor);
        }
        if (simulate->parsed()) {
            return cmd_simulate(args, config_path, paper_like, reps, !no_fit_both,
                                simulate->count("--seed") > 0, emit_data);
        }
        if (report->parsed()) return cmd_report(in_path, args.out_path);
    } catch (const dualcv::DataError& e) {
        return fail(e.what());
    } catch (const dualcv::EstimationError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    return 1;
}
