#pragma once

#include <memory>

#include "stablegof/spectral.hpp"

namespace stablegof {

struct InversionConfig {
    std::shared_ptr<const Spectrum> spectrum;
    int l = 25;                 // series terms
    int m = 500;                // product terms
    double quad_rel_tol = 1e-6;

    // l = 25 for kappa <= 2.5 and 10 above; m = 500 for kappa <= 5 and 300 above.
    static InversionConfig defaults(std::shared_ptr<const Spectrum> s);
    void validate() const;
};

// Alternating series value: midpoint of the last two partial sums, with the
// half-gap as the truncation bound. When 2l equals the eigenvalue count the sum
// is complete and is reported as is, with bound 0.
struct SeriesValue {
    double value = 0.0;
    double bound = 0.0;
    int terms = 0;         // series terms actually used (l after clamping)
    int products = 0;      // product terms actually used (m after clamping)
    int degenerate = 0;    // terms whose eigenvalue pair coincides (evaluated at the limit a = b)
};

SeriesValue cdf_dk_series(double x, const InversionConfig& c);
SeriesValue pdf_dk_series(double x, const InversionConfig& c);
double cdf_dk(double x, const InversionConfig& c);
double pdf_dk(double x, const InversionConfig& c);

struct QuantileResult {
    double x = 0.0;
    double series_bound = 0.0;  // CDF truncation bound mapped to x through the density
};

// Upper-xi point: F(x) = 1 - xi.
QuantileResult quantile_dk_bounded(double xi, const InversionConfig& c);
double quantile_dk(double xi, const InversionConfig& c);

}  // namespace stablegof
