#include "dualcv/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dualcv {

double chisq_sf(double x, double df) {
    if (!(df > 0.0)) throw std::domain_error("chisq_sf: df must be positive");
    if (x <= 0.0) return 1.0;
    boost::math::chi_squared dist(df);
    return boost::math::cdf(boost::math::complement(dist, x));
}

double student_t_sf(double t, double df) {
    if (!(df > 0.0)) throw std::domain_error("student_t_sf: df must be positive");
    boost::math::students_t dist(df);
    return boost::math::cdf(boost::math::complement(dist, t));
}

double student_t_quantile(double p, double df) {
    if (!(df > 0.0)) throw std::domain_error("student_t_quantile: df must be positive");
    if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("student_t_quantile: p outside (0,1)");
    boost::math::students_t dist(df);
    return boost::math::quantile(dist, p);
}

double f_sf(double x, double df1, double df2) {
    if (!(df1 > 0.0) || !(df2 > 0.0)) throw std::domain_error("f_sf: df must be positive");
    if (x <= 0.0) return 1.0;
    boost::math::fisher_f dist(df1, df2);
    return boost::math::cdf(boost::math::complement(dist, x));
}

double mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
    const size_t n = xs.size();
    if (n < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

TestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw std::invalid_argument("welch_t_test: each group needs at least 2 observations");
    }
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = mean(a);
    const double mb = mean(b);
    const double sa = sample_sd(a);
    const double sb = sample_sd(b);
    const double va = sa * sa / na;
    const double vb = sb * sb / nb;

    TestResult res;
    res.name = "welch_t";
    if (va + vb == 0.0) {
        // Degenerate: both groups constant. Identical means give p = 1.
        res.statistic = (ma == mb) ? 0.0 : std::numeric_limits<double>::infinity();
        res.df = na + nb - 2.0;
        res.p = (ma == mb) ? 1.0 : 0.0;
    } else {
        res.statistic = (ma - mb) / std::sqrt(va + vb);
        // Welch-Satterthwaite degrees of freedom
        res.df = (va + vb) * (va + vb) /
                 (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
        res.p = 2.0 * student_t_sf(std::fabs(res.statistic), res.df);
    }
    res.reject_at_5pct = res.p < 0.05;
    return res;
}

TestResult one_way_anova(const std::vector<std::vector<double>>& groups) {
    size_t k = groups.size();
    if (k < 2) throw std::invalid_argument("one_way_anova: need at least 2 groups");
    size_t n_total = 0;
    double grand_sum = 0.0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw std::invalid_argument("one_way_anova: group with < 2 observations");
        n_total += g.size();
        for (double x : g) grand_sum += x;
    }
    const double grand_mean = grand_sum / static_cast<double>(n_total);

    double ss_between = 0.0;
    double ss_within = 0.0;
    for (const auto& g : groups) {
        const double gm = mean(g);
        ss_between += static_cast<double>(g.size()) * (gm - grand_mean) * (gm - grand_mean);
        for (double x : g) ss_within += (x - gm) * (x - gm);
    }
    const double df1 = static_cast<double>(k - 1);
    const double df2 = static_cast<double>(n_total - k);

    TestResult res;
    res.name = "anova_f";
    res.df = df1;
    res.df2 = df2;
    if (ss_within == 0.0) {
        res.statistic = (ss_between == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
        res.p = (ss_between == 0.0) ? 1.0 : 0.0;
    } else {
        res.statistic = (ss_between / df1) / (ss_within / df2);
        res.p = f_sf(res.statistic, df1, df2);
    }
    res.reject_at_5pct = res.p < 0.05;
    return res;
}

}  // namespace dualcv
