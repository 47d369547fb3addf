#pragma once

#include <stdexcept>
#include <string>

namespace mwlab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class ConditioningError : public NumericError { using NumericError::NumericError; };
class ParameterError : public Error { using Error::Error; };
class SingularityError : public NumericError { using NumericError::NumericError; };
class ConfigurationError : public Error { using Error::Error; };
class ConvergenceError : public NumericError { using NumericError::NumericError; };
class FittingError : public NumericError { using NumericError::NumericError; };
class ConstructionError : public NumericError { using NumericError::NumericError; };

}  // namespace mwlab
