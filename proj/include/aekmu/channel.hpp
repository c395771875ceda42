#pragma once

#include <cstdint>
#include <vector>

#include "aekmu/foxh.hpp"
#include "aekmu/montecarlo.hpp"

namespace aekmu::channel {

/// The seven parameters of one alpha-eta-kappa-mu link.
struct FadingParams {
    double alpha = 2.0; // non-linearity
    double eta = 1.0;   // scattered in-phase/quadrature power ratio
    double kappa = 1.0; // dominant-to-scattered power ratio
    double mu = 1.0;    // cluster number
    double p = 1.0;     // cluster ratio mu_x/mu_y
    double q = 1.0;     // dominant-power-ratio / scattered-power-ratio
    double r_hat = 1.0; // alpha-root of E[R^alpha]

    void validate() const; // throws DomainError
};

/// Closed-form constants of the exact PDF plus the sampler parameterization.
struct DerivedConstants {
    double xi, delta;
    double psi1, psi2, psi3;
    double A1, A2, A3, A4, A5;
    double sigma_x, sigma_y;   // per-cluster std deviations
    double lambda_x, lambda_y; // total dominant amplitudes (sqrt of P_dx, P_dy)
    double mu_x, mu_y;         // cluster counts (may be non-integer)
};

DerivedConstants derive_constants(const FadingParams& params);

/// Swapping the in-phase/quadrature roles maps (eta, p, q) -> (1/eta, 1/p, 1/q)
/// and leaves the envelope distribution invariant. The canonical orientation
/// has A3 >= 0, which every numerical path here requires (the other
/// orientation's integrand carries e^{+|A3| v}).
FadingParams swapped(const FadingParams& params);
FadingParams canonical(const FadingParams& params);

// ---- analytic PDF/CDF paths -------------------------------------------------

/// Trivariate Mellin-Barnes integrand of the exact envelope PDF at x
/// (two-variate when p == eta makes the exponential block collapse).
foxh::GammaProductIntegrand envelope_pdf_integrand(const FadingParams& params, double x);

/// Same gamma structure with the CDF's inner integral resolved into a
/// lower-incomplete-gamma kernel (fast route), or kept as the fourth contour
/// (the raw four-variate form) when `four_contours` is set.
foxh::GammaProductIntegrand envelope_cdf_integrand(const FadingParams& params, double x,
                                                   bool four_contours = false);

/// Exact PDF via the trivariate Fox-H evaluation.
double pdf_exact(const FadingParams& params, double x, double tol = 1e-8);

/// Independent truth source: adaptive quadrature of the Bessel-product
/// convolution with Jacobi-weight endpoint substitutions, log-domain.
/// Accepts any real mu > 0.
double pdf_oracle_convolution(const FadingParams& params, double x, double rel_tol = 1e-11);

/// Truncated infinite-series PDF (Laguerre x regularized 0F1 form).
/// Throws SeriesSingularity when |p - eta| <= 1e-9.
double pdf_series(const FadingParams& params, double x, int n_terms);

enum class AsymptoticForm {
    derivation, // small-x limit constant verified against the oracle
    paper_eq11  // the printed form, kept for comparison
};

double pdf_asymptotic(const FadingParams& params, double x,
                      AsymptoticForm form = AsymptoticForm::derivation);

enum class CdfMethod { auto_select, foxh, foxh4, oracle };

/// P(R <= x); Fox-H primary path, oracle-integration fallback.
double cdf(const FadingParams& params, double x, CdfMethod method = CdfMethod::auto_select,
           double tol = 1e-8);

// ---- sampling ---------------------------------------------------------------

/// Counter layout: sample i consumes counters [i*stride, (i+1)*stride).
std::uint64_t sampler_stride(const FadingParams& params);

/// Physical sampler (sum of noncentral Gaussian squares). Requires integer
/// mu_x, mu_y within 1e-9; deterministic per (seed, stream_id, counter).
std::vector<double> sample_envelope(const FadingParams& params, mc::RandomStream& stream,
                                    std::uint64_t count, int threads = 0);

/// Dense table of the oracle density with cumulative mass, power-law tail
/// interpolation, and quantile inversion. Backs the inverse-CDF sampler and
/// the MGF quadrature of the sum-channel path.
class DensityTable {
public:
    DensityTable(const FadingParams& params, double rel_tol = 1e-9);

    double x_max() const { return x_[x_.size() - 1]; }
    double pdf(double x) const;      // interpolated
    double cdf(double x) const;      // interpolated, in [0, 1]
    double quantile(double u) const; // inverse CDF, u in (0, 1)
    double mass_defect() const { return mass_defect_; }

    /// MGF integral of the tabulated density against exp(-t x) on a per-node
    /// Gauss grid (complex t, Re t >= 0 required for the tail bound).
    foxh::Complex mgf(foxh::Complex t) const;

    /// mean of R^k over the table
    double moment(double k) const;

    const FadingParams& params() const { return params_; }
    double alpha_mu() const { return amu_; }
    /// coefficient of the x^{alpha mu - 1} small-x law
    double small_x_coefficient() const { return c0_; }

private:
    FadingParams params_;
    double amu_ = 0.0, c0_ = 0.0, mass_defect_ = 0.0;
    std::vector<double> x_, pdf_, cdf_;
    // fixed Gauss sub-grid for oscillatory MGF quadrature
    std::vector<double> gx_, gw_, gpdf_;
};

/// Inverse-CDF sampler for non-integer cluster counts (one uniform per draw).
std::vector<double> sample_envelope_inverse_cdf(const DensityTable& table,
                                                mc::RandomStream& stream, std::uint64_t count,
                                                int threads = 0);

} // namespace aekmu::channel
