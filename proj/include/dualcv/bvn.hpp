#pragma once

#include <stdexcept>

namespace dualcv {

// Error correlation between the two latent utilities. Restricted to the
// open interval (-1, 1); at the boundary the joint density degenerates.
class Correlation {
public:
    explicit Correlation(double rho);
    double value() const { return rho_; }

private:
    double rho_;
};

// Joint probabilities of the four (y1, y2) response cells. The cells
// partition the plane, so the four entries sum to one.
struct QuadrantProbs {
    double p11;  // P[y1=1, y2=1]
    double p10;  // P[y1=1, y2=0]
    double p01;  // P[y1=0, y2=1]
    double p00;  // P[y1=0, y2=0]
};

double norm_pdf(double x);
double norm_cdf(double x);

// log Phi(x), stable over the whole real line (direct evaluation underflows
// near x = -37).
double log_norm_cdf(double x);

// Inverse of norm_cdf. Throws std::domain_error unless 0 < p < 1.
double norm_quantile(double p);

// phi(x) / Phi(x), the inverse Mills ratio, stable in the far left tail.
double inverse_mills(double x);

// Standard bivariate normal density at (z1, z2) with correlation rho.
double bvn_pdf(double z1, double z2, Correlation rho);

// P[Z1 <= h, Z2 <= k] for standard bivariate normal with correlation rho.
// h and k may be +/-infinity. Absolute accuracy is of order 1e-15.
double bvn_cdf(double h, double k, Correlation rho);

// Cell probabilities for systematic utilities (v1, v2) under unit-variance
// normalization: p11 = P[e1 > -v1, e2 > -v2] and so on. Each cell is
// evaluated directly as an orthant probability so that no cell suffers
// cancellation in the tails.
QuadrantProbs quadrant_probs(double v1, double v2, Correlation rho);

}  // namespace dualcv
