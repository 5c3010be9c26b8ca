#ifndef DSHIFT_ERROR_HPP_
#define DSHIFT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace dshift {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument or configuration value does not hold.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Source support does not cover the target (zero selection/source density).
class PositivityError : public Error {
public:
  using Error::Error;
};

/// An iterative solver hit its iteration cap before meeting its tolerance.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

/// Singular or ill-posed linear system.
class NumericalError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace dshift

#endif /* DSHIFT_ERROR_HPP_ */
