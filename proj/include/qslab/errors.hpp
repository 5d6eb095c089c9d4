#pragma once

#include <stdexcept>
#include <string>

namespace qslab {

// Error taxonomy mirroring the CLI exit-code contract:
// domain / assumption violations map to exit code 2, numerical failures to 3.

class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A named model assumption does not hold for the supplied inputs.
// The message carries the violated condition verbatim, e.g. "‖H‖ < ν/2".
class assumption_error : public domain_error {
public:
    explicit assumption_error(const std::string& condition)
        : domain_error("assumption violated: " + condition) {}
};

// No sign change (or an otherwise unusable bracket) in a root search.
class bracket_error : public domain_error {
public:
    using domain_error::domain_error;
};

// Conditioning on a survival event of probability zero.
class conditioning_error : public domain_error {
public:
    explicit conditioning_error(double survival_fraction)
        : domain_error("conditioning on null survival event"),
          survival_fraction(survival_fraction) {}
    double survival_fraction;
};

// The chain dies out before the requested horizon.
class degenerate_chain_error : public domain_error {
public:
    using domain_error::domain_error;
};

// Quadrature, ODE, fitting or generation failures.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qslab
