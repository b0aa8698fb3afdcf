#pragma once

#include <stdexcept>
#include <string>

namespace stablegof {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid arguments or preconditions violated by the caller.
class DomainError : public Error {
public:
    using Error::Error;
};

// A numerical routine could not reach its tolerance.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace stablegof
