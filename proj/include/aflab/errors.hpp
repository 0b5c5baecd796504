#pragma once

#include <stdexcept>
#include <string>

namespace aflab {

/// Base class for all recoverable errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define AFLAB_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                    \
    public:                                                        \
        explicit Name(const std::string& what) : Error(what) {}    \
    }

AFLAB_DEFINE_ERROR(OutOfDomain);        // evaluation radius outside the manifold
AFLAB_DEFINE_ERROR(OutOfRange);         // level value outside the admissible interval
AFLAB_DEFINE_ERROR(DomainError);        // parameters violate a precondition
AFLAB_DEFINE_ERROR(TailNotConvergent);  // tail extrapolation does not settle
AFLAB_DEFINE_ERROR(NoNormalization);    // the defining integral diverges, no unit-capacity potential
AFLAB_DEFINE_ERROR(StepFailure);        // adaptive ODE step size underflow
AFLAB_DEFINE_ERROR(NoConvergence);      // iterative linear solve exhausted its budget
AFLAB_DEFINE_ERROR(BadExcision);        // excised ball unresolvable on the grid
AFLAB_DEFINE_ERROR(FitUnstable);        // far-field extraction shells disagree
AFLAB_DEFINE_ERROR(ConfigError);        // malformed configuration input
AFLAB_DEFINE_ERROR(IoError);            // artifact file cannot be written

#undef AFLAB_DEFINE_ERROR

} // namespace aflab
