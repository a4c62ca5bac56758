#pragma once

#include <span>
#include <string>
#include <vector>

namespace dualcv {

// Outcome of a hypothesis test: statistic, degrees of freedom, upper-tail
// p-value, and a human-readable verdict at the 5% level.
struct TestResult {
    std::string name;
    double statistic = 0.0;
    double df = 0.0;
    double df2 = 0.0;  // second df for F tests, 0 otherwise
    double p = 1.0;
    bool reject_at_5pct = false;
};

double chisq_sf(double x, double df);        // upper tail of chi-square
double student_t_sf(double t, double df);    // upper tail of Student t
double student_t_quantile(double p, double df);
double f_sf(double x, double df1, double df2);  // upper tail of F

double mean(std::span<const double> xs);
double sample_sd(std::span<const double> xs);  // n-1 denominator; 0 for n < 2

// Welch two-sample t test (unequal variances), two-sided p.
TestResult welch_t_test(std::span<const double> a, std::span<const double> b);

// One-way ANOVA omnibus F over k groups.
TestResult one_way_anova(const std::vector<std::vector<double>>& groups);

}  // namespace dualcv
