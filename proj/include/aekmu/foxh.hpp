#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace aekmu::foxh {

using Complex = std::complex<double>;

/// One Gamma(b + sum_j beta_j s_j)^{+-1} factor of a Mellin-Barnes integrand.
struct GammaFactor {
    double offset = 0.0;               // b
    std::vector<double> weights;       // beta_j, one entry per integration variable
    int power = +1;                    // +1 numerator, -1 denominator

    bool touches(std::size_t axis) const {
        return axis < weights.size() && weights[axis] != 0.0;
    }
};

/// Lower-incomplete-gamma kernel gamma(w, x) * x^{-w} with w = b + beta.s.
/// This is the closed form of an exponential-type contour whose ladder has
/// been resolved analytically; it has left poles at w = 0, -1, -2, ... and
/// decays algebraically along vertical lines, so it plans like a numerator
/// gamma factor with no exponential balance contribution.
struct IncGammaFactor {
    double offset = 0.0;
    std::vector<double> weights;
    double x = 0.0;
};

/// Language-neutral encoding of every Fox-H instance in this project:
/// prefactor * (1/2*pi*i)^nvars * contour-int prod Gamma(...)^{+-1} prod z_i^{s_i} ds.
struct GammaProductIntegrand {
    int nvars = 0;
    std::vector<GammaFactor> factors;
    std::vector<IncGammaFactor> incgamma_factors; // optional analytic-kernel factors
    std::vector<double> arguments;                // z_i > 0
    double prefactor = 1.0;
};

enum class AxisPath {
    VerticalLine, // s = c + i t, t in [-T, T]; valid when the gamma balance decays
    RightLoop     // rectangular loop around the right pole ladder (entire-type axes)
};

/// Where each contour runs. Loop axes share the abscissa as the loop cap;
/// the same pole-separation constraints apply there.
struct ContourPlan {
    std::vector<double> abscissas;      // c_i
    double half_length = 20.0;          // initial T for vertical axes
    int nodes_per_unit = 20;            // trapezoid density on vertical axes
    std::vector<AxisPath> paths;        // per-axis contour shape
    double loop_height = 0.5;           // leg offset +-i h of loop axes
    int loop_nodes_per_unit = 6;        // initial Gauss-panel density on loop legs
};

struct EvalOptions {
    int max_rounds = 14;
    int threads = 0;          // 0 = library default
    std::ostream* debug = nullptr; // per-refinement partial sums, for forensics
};

struct EvalStats {
    int rounds = 0;
    std::uint64_t nodes = 0;
    double imag_residual = 0.0;
};

ContourPlan plan_contour(const GammaProductIntegrand& integrand);

/// Throws ContourViolation naming the offending factor.
void validate_contour(const GammaProductIntegrand& integrand, const ContourPlan& plan);

/// (1/2*pi*i)^nvars tensor contour integral times the prefactor.
/// T / loop extent grow until the tail share drops below tol twice in a row,
/// node density doubles until two successive refinements agree within tol,
/// and the imaginary residual must stay below tol * |result| (up to the
/// roundoff floor of the accumulated magnitude).
double evaluate(const GammaProductIntegrand& integrand, const ContourPlan& plan, double tol,
                const EvalOptions& opts = {}, EvalStats* stats = nullptr);

/// Plain-text table of the integrand and plan.
void dump(const GammaProductIntegrand& integrand, const ContourPlan& plan, std::ostream& os);

/// Worker cap used by evaluate() and the Monte Carlo driver when the caller
/// does not specify one. Thread count never changes results.
void set_default_threads(int n);
int default_threads();

} // namespace aekmu::foxh
