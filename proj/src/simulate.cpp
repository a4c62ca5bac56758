#include "dualcv/simulate.hpp"

#include "dualcv/biprobit.hpp"
#include "dualcv/errors.hpp"
#include "dualcv/probit.hpp"
#include "dualcv/rng.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

namespace dualcv {

namespace {

using ordered_json = nlohmann::ordered_json;

// rng slot layout per record: covariates take their map-order index; the
// remaining draws use high slots clear of any realistic covariate count.
constexpr std::uint64_t kSlotBidCash = 1000;
constexpr std::uint64_t kSlotBidLabor = 1001;
constexpr std::uint64_t kSlotEps1 = 1002;
constexpr std::uint64_t kSlotXi = 1003;

}  // namespace

void DgpConfig::validate() const {
    if (n < 1) throw DataError("dgp: n must be at least 1");
    if (!(std::fabs(rho) < 1.0)) throw DataError("dgp: |rho| must be below 1");
    bid_design.validate();
    std::set<std::string> known{"const", bid_cash_name, bid_labor_name, y1_name};
    for (const auto& [name, gen] : covariate_generators) {
        if (!known.insert(name).second) {
            throw DataError("dgp: covariate '" + name + "' collides with a reserved name");
        }
        if (gen.kind == CovariateGen::Kind::Bernoulli && (gen.a < 0.0 || gen.a > 1.0)) {
            throw DataError("dgp: bernoulli p outside [0,1] for '" + name + "'");
        }
        if (gen.kind == CovariateGen::Kind::Normal && gen.b < 0.0) {
            throw DataError("dgp: negative sd for '" + name + "'");
        }
        if (gen.kind == CovariateGen::Kind::Uniform && gen.b < gen.a) {
            throw DataError("dgp: uniform upper below lower for '" + name + "'");
        }
    }
    auto check_eq = [&](const std::vector<std::pair<std::string, double>>& coefs,
                        const std::string& label, bool allow_y1) {
        std::set<std::string> seen;
        for (const auto& [name, val] : coefs) {
            (void)val;
            if (!seen.insert(name).second) {
                throw DataError("dgp: duplicate coefficient '" + name + "' in " + label);
            }
            const bool ok = name == "const" || name == bid_cash_name ||
                            name == bid_labor_name || (allow_y1 && name == y1_name) ||
                            covariate_generators.count(name);
            if (!ok) throw DataError("dgp: " + label + " names unknown variable '" + name + "'");
        }
    };
    check_eq(eq1_coefs, "eq1", false);
    check_eq(eq2_coefs, "eq2", true);
}

double DgpConfig::eq1_coef(const std::string& name) const {
    for (const auto& [nm, v] : eq1_coefs) {
        if (nm == name) return v;
    }
    throw DataError("dgp: eq1 has no coefficient '" + name + "'");
}

double DgpConfig::eq2_coef(const std::string& name) const {
    for (const auto& [nm, v] : eq2_coefs) {
        if (nm == name) return v;
    }
    throw DataError("dgp: eq2 has no coefficient '" + name + "'");
}

namespace {

CovariateGen gen_from_json(const ordered_json& j, const std::string& name) {
    CovariateGen g;
    const std::string kind = j.value("kind", std::string());
    if (kind == "normal") {
        g.kind = CovariateGen::Kind::Normal;
        g.a = j.value("mu", 0.0);
        g.b = j.value("sd", 1.0);
    } else if (kind == "bernoulli") {
        g.kind = CovariateGen::Kind::Bernoulli;
        g.a = j.value("p", 0.5);
        g.b = 0.0;
    } else if (kind == "uniform") {
        g.kind = CovariateGen::Kind::Uniform;
        g.a = j.value("a", 0.0);
        g.b = j.value("b", 1.0);
    } else {
        throw DataError("dgp: covariate '" + name + "': unknown kind '" + kind + "'");
    }
    return g;
}

ordered_json gen_to_json(const CovariateGen& g) {
    ordered_json j;
    switch (g.kind) {
        case CovariateGen::Kind::Normal:
            j["kind"] = "normal";
            j["mu"] = g.a;
            j["sd"] = g.b;
            break;
        case CovariateGen::Kind::Bernoulli:
            j["kind"] = "bernoulli";
            j["p"] = g.a;
            break;
        case CovariateGen::Kind::Uniform:
            j["kind"] = "uniform";
            j["a"] = g.a;
            j["b"] = g.b;
            break;
    }
    return j;
}

std::vector<std::pair<std::string, double>> coefs_from_json(const ordered_json& j,
                                                            const std::string& label) {
    if (!j.is_object()) throw DataError("dgp: " + label + " must be an object");
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [name, v] : j.items()) out.emplace_back(name, v.get<double>());
    return out;
}

}  // namespace

DgpConfig DgpConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dgp config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

DgpConfig DgpConfig::from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw DataError(std::string("dgp: invalid JSON: ") + e.what());
    }
    DgpConfig cfg;
    cfg.n = j.value("n", size_t{0});
    cfg.seed = j.value("seed", std::uint64_t{42});
    cfg.rho = j.value("rho", 0.0);
    if (j.contains("names")) {
        cfg.y1_name = j["names"].value("y1", cfg.y1_name);
        cfg.y2_name = j["names"].value("y2", cfg.y2_name);
        cfg.bid_cash_name = j["names"].value("bid_cash", cfg.bid_cash_name);
        cfg.bid_labor_name = j["names"].value("bid_labor", cfg.bid_labor_name);
    }
    if (!j.contains("bid_design")) throw DataError("dgp: missing bid_design");
    cfg.bid_design.cash_bids = j["bid_design"].value("cash", std::vector<double>{});
    cfg.bid_design.labor_bids = j["bid_design"].value("labor", std::vector<double>{});
    if (j.contains("covariates")) {
        for (const auto& [name, spec] : j["covariates"].items()) {
            cfg.covariate_generators.emplace(name, gen_from_json(spec, name));
        }
    }
    if (!j.contains("eq1") || !j.contains("eq2")) throw DataError("dgp: eq1 and eq2 required");
    cfg.eq1_coefs = coefs_from_json(j["eq1"], "eq1");
    cfg.eq2_coefs = coefs_from_json(j["eq2"], "eq2");
    cfg.validate();
    return cfg;
}

std::string DgpConfig::to_json() const {
    ordered_json j;
    j["n"] = n;
    j["seed"] = seed;
    j["rho"] = rho;
    j["names"] = {{"y1", y1_name}, {"y2", y2_name}, {"bid_cash", bid_cash_name},
                  {"bid_labor", bid_labor_name}};
    j["bid_design"] = {{"cash", bid_design.cash_bids}, {"labor", bid_design.labor_bids}};
    ordered_json cov = ordered_json::object();
    for (const auto& [name, g] : covariate_generators) cov[name] = gen_to_json(g);
    j["covariates"] = std::move(cov);
    ordered_json e1 = ordered_json::object();
    for (const auto& [name, v] : eq1_coefs) e1[name] = v;
    j["eq1"] = std::move(e1);
    ordered_json e2 = ordered_json::object();
    for (const auto& [name, v] : eq2_coefs) e2[name] = v;
    j["eq2"] = std::move(e2);
    return j.dump(2) + "\n";
}

DgpConfig paper_like_config() {
    DgpConfig cfg;
    cfg.n = 194;
    cfg.seed = 42;
    cfg.rho = 0.9;
    cfg.bid_design.cash_bids = {25, 31, 37, 43, 49, 58, 70};
    cfg.bid_design.labor_bids = {1, 1.5, 2, 2.5, 3};
    cfg.covariate_generators["dependency"] = {CovariateGen::Kind::Normal, 0.86, 0.63};
    cfg.covariate_generators["income_pc"] = {CovariateGen::Kind::Normal, 1.123, 1.462};
    cfg.covariate_generators["experience"] = {CovariateGen::Kind::Bernoulli, 0.18, 0.0};
    cfg.covariate_generators["young"] = {CovariateGen::Kind::Bernoulli, 0.55, 0.0};
    cfg.covariate_generators["education"] = {CovariateGen::Kind::Normal, 5.65, 4.15};
    cfg.covariate_generators["land_pc"] = {CovariateGen::Kind::Normal, 1.04, 0.54};
    cfg.covariate_generators["farm_cart"] = {CovariateGen::Kind::Bernoulli, 0.31, 0.0};
    cfg.eq1_coefs = {{"const", 1.43},     {"bid_cash", -0.04}, {"dependency", -0.89},
                     {"income_pc", 0.55}, {"experience", 1.17}, {"young", 0.84},
                     {"education", 0.07}};
    cfg.eq2_coefs = {{"const", 2.19},      {"wtp_yes", -1.21},  {"bid_labor", -0.73},
                     {"land_pc", -0.18},   {"experience", 0.71}, {"dependency", -1.06},
                     {"farm_cart", 0.32},  {"young", 1.49},      {"education", 0.07}};
    return cfg;
}

BiprobitSpec spec_for(const DgpConfig& cfg) {
    BiprobitSpec spec;
    spec.eq1.outcome = cfg.y1_name;
    for (const auto& [name, v] : cfg.eq1_coefs) {
        (void)v;
        if (name != "const") spec.eq1.regressors.push_back(name);
    }
    spec.eq2.outcome = cfg.y2_name;
    for (const auto& [name, v] : cfg.eq2_coefs) {
        (void)v;
        if (name != "const") spec.eq2.regressors.push_back(name);
    }
    spec.eq2.endogenous_regressor = cfg.y1_name;
    return spec;
}

Dataset generate(const DgpConfig& cfg, std::uint64_t rep) {
    cfg.validate();
    Dataset ds;
    ds.bid_design = cfg.bid_design;

    auto add_column = [&](const std::string& name, ColumnSpec cs) {
        ds.columns.emplace(name, cs);
        if (cs.role != ColumnRole::Id && cs.role != ColumnRole::Passthrough) {
            VariableMeta meta;
            meta.kind = (cs.role == ColumnRole::Outcome) ? VariableKind::Dummy : cs.kind;
            ds.variable_meta.emplace(name, meta);
        }
    };
    {
        ColumnSpec cs;
        cs.role = ColumnRole::Outcome;
        cs.vehicle = "cash";
        add_column(cfg.y1_name, cs);
        cs.vehicle = "labor";
        add_column(cfg.y2_name, cs);
        cs = ColumnSpec{};
        cs.role = ColumnRole::Bid;
        cs.vehicle = "cash";
        add_column(cfg.bid_cash_name, cs);
        cs.vehicle = "labor";
        add_column(cfg.bid_labor_name, cs);
        for (const auto& [name, g] : cfg.covariate_generators) {
            ColumnSpec cov;
            cov.role = ColumnRole::Covariate;
            cov.kind = g.kind == CovariateGen::Kind::Bernoulli ? VariableKind::Dummy
                                                               : VariableKind::Continuous;
            add_column(name, cov);
        }
    }

    const double sq = std::sqrt(1.0 - cfg.rho * cfg.rho);
    ds.records.reserve(cfg.n);
    for (size_t i = 0; i < cfg.n; ++i) {
        SurveyRecord rec;
        rec.id = std::to_string(i + 1);
        std::uint64_t slot = 0;
        for (const auto& [name, g] : cfg.covariate_generators) {
            const std::uint64_t word = rng::at(cfg.seed, rep, i, slot++);
            double x = 0.0;
            switch (g.kind) {
                case CovariateGen::Kind::Normal:
                    x = g.a + g.b * rng::normal(word);
                    break;
                case CovariateGen::Kind::Bernoulli:
                    x = rng::uniform01(word) < g.a ? 1.0 : 0.0;
                    break;
                case CovariateGen::Kind::Uniform:
                    x = g.a + (g.b - g.a) * rng::uniform01(word);
                    break;
            }
            rec.covariates[name] = x;
        }
        rec.bid_cash = cfg.bid_design.cash_bids[rng::pick(
            rng::at(cfg.seed, rep, i, kSlotBidCash), cfg.bid_design.cash_bids.size())];
        rec.bid_labor = cfg.bid_design.labor_bids[rng::pick(
            rng::at(cfg.seed, rep, i, kSlotBidLabor), cfg.bid_design.labor_bids.size())];

        auto value_of = [&](const std::string& name) {
            if (name == "const") return 1.0;
            if (name == cfg.bid_cash_name) return rec.bid_cash;
            if (name == cfg.bid_labor_name) return rec.bid_labor;
            if (name == cfg.y1_name) return static_cast<double>(rec.y1);
            return rec.covariates.at(name);
        };

        double v1 = 0.0;
        for (const auto& [name, c] : cfg.eq1_coefs) v1 += c * value_of(name);
        const double e1 = rng::normal(rng::at(cfg.seed, rep, i, kSlotEps1));
        rec.y1 = v1 + e1 > 0.0 ? 1 : 0;

        double v2 = 0.0;
        for (const auto& [name, c] : cfg.eq2_coefs) v2 += c * value_of(name);
        const double xi = rng::normal(rng::at(cfg.seed, rep, i, kSlotXi));
        const double e2 = cfg.rho * e1 + sq * xi;
        rec.y2 = v2 + e2 > 0.0 ? 1 : 0;

        ds.records.push_back(std::move(rec));
    }
    return ds;
}

namespace {

struct RepOut {
    bool ok = false;
    Eigen::VectorXd est;  // eq1 coefs, then eq2 coefs
    Eigen::VectorXd se;
    double rho_est = 0.0;
    double athrho = 0.0;
    double athrho_se = 0.0;
    bool has_univ = false;
    double eta_univ = 0.0;
    double eta_univ_t = 0.0;
    bool lr_reject = false;
};

RepOut run_replication(const DgpConfig& cfg, const BiprobitSpec& spec, std::uint64_t rep,
                       bool fit_both, const std::string& y1_name) {
    RepOut out;
    try {
        const Dataset ds = generate(cfg, rep);
        JointDesign d = build_joint_design(spec, ds);
        BiprobitFit fit = fit_biprobit(d.X1, d.y1, d.X2, d.y2, d.names1, d.names2);
        if (!fit.converged) return out;
        const Eigen::Index k1 = fit.k1();
        const Eigen::Index k2 = fit.k2();
        out.est.resize(k1 + k2);
        out.est << fit.eq1_coefs, fit.eq2_coefs;
        out.se.resize(k1 + k2);
        for (Eigen::Index j = 0; j < k1 + k2; ++j) out.se(j) = std::sqrt(fit.vcov(j, j));
        out.rho_est = fit.rho;
        out.athrho = fit.athrho;
        out.athrho_se = fit.athrho_se();
        if (fit_both) {
            const FitResult f1 = fit_probit(d.X1, d.y1, d.names1);
            const FitResult f2 = fit_probit(d.X2, d.y2, d.names2);
            const TestResult lr = lr_test_rho(fit, f1, f2);
            out.lr_reject = lr.reject_at_5pct;
            out.eta_univ = f2.coef(y1_name);
            out.eta_univ_t = f2.tstat(y1_name);
            out.has_univ = true;
        }
        out.ok = true;
    } catch (const std::exception&) {
        out.ok = false;
    }
    return out;
}

}  // namespace

McResult monte_carlo(const DgpConfig& cfg, size_t reps, bool fit_both, int threads) {
    if (reps < 1) throw DataError("monte_carlo: reps must be at least 1");
    cfg.validate();
    const BiprobitSpec spec = spec_for(cfg);

    std::vector<RepOut> outs(reps);
    const size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const size_t nthreads = std::min<size_t>(
        std::max<size_t>(1, threads > 0 ? static_cast<size_t>(threads) : hw), reps);
    if (nthreads == 1) {
        for (size_t r = 0; r < reps; ++r) {
            outs[r] = run_replication(cfg, spec, r, fit_both, cfg.y1_name);
        }
    } else {
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (size_t r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
                outs[r] = run_replication(cfg, spec, r, fit_both, cfg.y1_name);
            }
        };
        std::vector<std::thread> pool;
        for (size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();
    }

    // Truth vector aligned with the design columns.
    std::vector<std::string> names;
    std::vector<std::string> equations;
    std::vector<double> truth;
    names.push_back("const");
    equations.push_back("eq1");
    truth.push_back(cfg.eq1_coef("const"));
    for (const auto& [nm, v] : cfg.eq1_coefs) {
        if (nm != "const") {
            names.push_back(nm);
            equations.push_back("eq1");
            truth.push_back(v);
        }
    }
    names.push_back("const");
    equations.push_back("eq2");
    truth.push_back(cfg.eq2_coef("const"));
    for (const auto& [nm, v] : cfg.eq2_coefs) {
        if (nm != "const") {
            names.push_back(nm);
            equations.push_back("eq2");
            truth.push_back(v);
        }
    }

    McResult res;
    res.replications = reps;
    res.seed = cfg.seed;
    res.n = cfg.n;
    size_t ok_count = 0;

    const size_t kp = names.size();
    std::vector<double> sum_est(kp, 0.0), sum_sq_err(kp, 0.0);
    std::vector<size_t> covered(kp, 0);
    double sum_rho = 0.0, sq_rho = 0.0;
    size_t rho_covered = 0;
    size_t lr_rejects = 0, univ_count = 0;
    double sum_eta_univ = 0.0;
    size_t flip_or_insig = 0;
    const double eta_truth = [&] {
        for (const auto& [nm, v] : cfg.eq2_coefs) {
            if (nm == cfg.y1_name) return v;
        }
        return 0.0;
    }();

    // eq2 block sits after eq1's in the stacked estimate vector; locate the
    // eta slot once.
    std::optional<size_t> eta_slot;
    for (size_t j = 0; j < kp; ++j) {
        if (equations[j] == "eq2" && names[j] == cfg.y1_name) eta_slot = j;
    }

    for (const RepOut& r : outs) {
        if (!r.ok) continue;
        ++ok_count;
        for (size_t j = 0; j < kp; ++j) {
            const auto je = static_cast<Eigen::Index>(j);
            const double err = r.est(je) - truth[j];
            sum_est[j] += r.est(je);
            sum_sq_err[j] += err * err;
            if (std::fabs(err) <= 1.96 * r.se(je)) ++covered[j];
        }
        sum_rho += r.rho_est;
        sq_rho += (r.rho_est - cfg.rho) * (r.rho_est - cfg.rho);
        const double lo = std::tanh(r.athrho - 1.96 * r.athrho_se);
        const double hi = std::tanh(r.athrho + 1.96 * r.athrho_se);
        if (cfg.rho >= lo && cfg.rho <= hi) ++rho_covered;
        if (r.has_univ) {
            ++univ_count;
            if (r.lr_reject) ++lr_rejects;
            sum_eta_univ += r.eta_univ;
            const bool flip = eta_truth != 0.0 && (r.eta_univ >= 0.0) != (eta_truth >= 0.0);
            const bool insig = std::fabs(r.eta_univ_t) < 1.96;
            if (flip || insig) ++flip_or_insig;
        }
    }
    res.failures = reps - ok_count;
    res.failure_rate = static_cast<double>(res.failures) / static_cast<double>(reps);
    if (ok_count == 0) return res;

    const double dok = static_cast<double>(ok_count);
    for (size_t j = 0; j < kp; ++j) {
        ParamStat ps;
        ps.equation = equations[j];
        ps.name = names[j];
        ps.truth = truth[j];
        ps.mean_est = sum_est[j] / dok;
        ps.bias = ps.mean_est - truth[j];
        ps.rmse = std::sqrt(sum_sq_err[j] / dok);
        ps.ci_coverage = static_cast<double>(covered[j]) / dok;
        res.params.push_back(std::move(ps));
    }
    {
        ParamStat ps;
        ps.equation = "rho";
        ps.name = "rho";
        ps.truth = cfg.rho;
        ps.mean_est = sum_rho / dok;
        ps.bias = ps.mean_est - cfg.rho;
        ps.rmse = std::sqrt(sq_rho / dok);
        ps.ci_coverage = static_cast<double>(rho_covered) / dok;
        res.params.push_back(std::move(ps));
    }
    if (eta_slot) res.eta_joint_coverage = res.params[*eta_slot].ci_coverage;
    if (univ_count > 0) {
        const double du = static_cast<double>(univ_count);
        res.lr_rejection_rate = static_cast<double>(lr_rejects) / du;
        res.eta_univ_mean_bias = sum_eta_univ / du - eta_truth;
        res.eta_flip_or_insig_rate = static_cast<double>(flip_or_insig) / du;
    }
    return res;
}

}  // namespace dualcv
