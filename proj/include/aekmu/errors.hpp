#pragma once

#include <stdexcept>
#include <string>

namespace aekmu {

// Base class for every numerical/usage failure raised by the library.
// Callers that need to distinguish causes catch the concrete type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DomainError : Error { using Error::Error; };          // argument outside the admissible range
struct PoleError : Error { using Error::Error; };            // evaluation at/next to a gamma pole
struct NoValidContour : Error { using Error::Error; };       // pole-separation constraints infeasible
struct ContourViolation : Error { using Error::Error; };     // plan does not separate the pole ladders
struct NoConvergence : Error { using Error::Error; };        // refinement budget exhausted
struct QuadratureFailure : Error { using Error::Error; };
struct SeriesSingularity : Error { using Error::Error; };    // p == eta degeneracy of the series PDF
struct NonIntegerClusters : Error { using Error::Error; };   // physical sampler needs integer mu_x, mu_y
struct DimensionCap : Error { using Error::Error; };         // exact multivariate path beyond supported N
struct InversionFailure : Error { using Error::Error; };     // Laplace inversion did not stabilize
struct EmptyInput : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

} // namespace aekmu
