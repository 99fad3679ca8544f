#ifndef NNREACH_ERRORS_HPP
#define NNREACH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nnreach {

// Failures raised while a reachability run is in progress. Argument and
// dimension errors use the std exceptions directly.

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// x <= xhat broken by more than the drift tolerance.
class OrderingViolation : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

// A state left the box on which frozen network bounds were computed.
class BoundsEscape : public NumericalError
{
public:
    BoundsEscape(const std::string& what, int coordinate)
        : NumericalError(what), coordinate_(coordinate)
    {
    }
    int coordinate() const { return coordinate_; }

private:
    int coordinate_;
};

} // namespace nnreach

#endif
