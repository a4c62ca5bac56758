#pragma once

#include "dualcv/data.hpp"
#include "dualcv/model.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dualcv {

struct CovariateGen {
    enum class Kind { Normal, Bernoulli, Uniform } kind = Kind::Normal;
    double a = 0.0;  // mu | p | lower
    double b = 1.0;  // sd | unused | upper
};

// Data-generating process for the recursive system: covariates and bids are
// drawn per record, (e1, e2) are correlated standard normals, y1 = 1{v1+e1>0}
// feeds into v2, then y2 = 1{v2+e2>0}.
struct DgpConfig {
    size_t n = 0;
    // Ordered (name, value) pairs; names refer to "const", a bid column, the
    // eq1 outcome (in eq2 only), or covariate_generators entries.
    std::vector<std::pair<std::string, double>> eq1_coefs;
    std::vector<std::pair<std::string, double>> eq2_coefs;
    double rho = 0.0;
    BidDesign bid_design;
    std::map<std::string, CovariateGen> covariate_generators;
    std::uint64_t seed = 42;
    std::string y1_name = "wtp_yes";
    std::string y2_name = "wtc_yes";
    std::string bid_cash_name = "bid_cash";
    std::string bid_labor_name = "bid_labor";

    void validate() const;
    double eq1_coef(const std::string& name) const;
    double eq2_coef(const std::string& name) const;

    static DgpConfig from_json_file(const std::string& path);
    static DgpConfig from_json_text(const std::string& text);
    std::string to_json() const;
};

// Calibration transcribed from the study's joint-model estimates; generates
// realistic fixtures.
DgpConfig paper_like_config();

// Model specification matching the config's coefficient layout.
BiprobitSpec spec_for(const DgpConfig& cfg);

// Deterministic given (cfg.seed, rep): draws use a counter-based stream keyed
// by (seed, rep, record, slot), so thread count and call order are irrelevant.
Dataset generate(const DgpConfig& cfg, std::uint64_t rep = 0);

struct ParamStat {
    std::string equation;  // "eq1" | "eq2" | "rho"
    std::string name;
    double truth = 0.0;
    double mean_est = 0.0;
    double bias = 0.0;
    double rmse = 0.0;
    double ci_coverage = 0.0;  // 95% Wald CI from the joint fit
};

struct McResult {
    size_t replications = 0;
    size_t failures = 0;  // replications where a fit threw or failed to converge
    double failure_rate = 0.0;
    std::vector<ParamStat> params;
    double lr_rejection_rate = 0.0;       // LR test of rho=0 at 5%
    double eta_univ_mean_bias = 0.0;      // univariate eq2 y1 coefficient vs truth
    double eta_flip_or_insig_rate = 0.0;  // sign flip or |t| < 1.96 under independence
    double eta_joint_coverage = 0.0;      // convenience echo of the eta ParamStat
    std::uint64_t seed = 0;
    size_t n = 0;
};

// Runs `reps` independent replications: generate, fit the univariate pair,
// fit the joint model, aggregate. fit_both=false skips the univariate-pair
// bookkeeping (LR and eta diagnostics are then absent). Results are
// independent of `threads`.
McResult monte_carlo(const DgpConfig& cfg, size_t reps, bool fit_both = true, int threads = 1);

}  // namespace dualcv
