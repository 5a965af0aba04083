#pragma once

#include <stdexcept>
#include <string>

namespace speccav {

/// Failure of a numerical procedure (as opposed to bad input). The CLI maps
/// every subclass to exit code 2.
class NumericalError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class NoConvergence : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

class RestartLimitExceeded : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

class DivergedMessage : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

class DivergedPopulation : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

class EdgeNotBracketed : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

class NonMonotoneStatistic : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

class DegenerateFit : public NumericalError
{
  public:
    DegenerateFit(std::string const& what, double beta_lo, double beta_hi)
        : NumericalError(what), beta_lo_(beta_lo), beta_hi_(beta_hi)
    {
    }

    double beta_lo() const { return beta_lo_; }
    double beta_hi() const { return beta_hi_; }

  private:
    double beta_lo_;
    double beta_hi_;
};

class InsufficientTailSamples : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

class AllZeroInput : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

class IncompatibleBinning : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

}  // namespace speccav
