#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace obspinn {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define OBSPINN_DEFINE_ERROR(Name)        \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

// model
OBSPINN_DEFINE_ERROR(UndeclaredSymbol);
OBSPINN_DEFINE_ERROR(NonPolynomialTerm);
OBSPINN_DEFINE_ERROR(OrderOverflow);
OBSPINN_DEFINE_ERROR(InvalidModel);
// algebra
OBSPINN_DEFINE_ERROR(RingMismatch);
OBSPINN_DEFINE_ERROR(ResourceBudgetExceeded);
OBSPINN_DEFINE_ERROR(InexactDivision);
// observability
OBSPINN_DEFINE_ERROR(UnsupportedMultiOutput);
OBSPINN_DEFINE_ERROR(NoUnmeasuredState);
OBSPINN_DEFINE_ERROR(DegreeTooHigh);
OBSPINN_DEFINE_ERROR(DenominatorNearZero);
// simulate
OBSPINN_DEFINE_ERROR(NonFiniteState);
OBSPINN_DEFINE_ERROR(OutOfDomain);
// training / neural
OBSPINN_DEFINE_ERROR(EmptySplit);
OBSPINN_DEFINE_ERROR(NonFiniteLoss);
OBSPINN_DEFINE_ERROR(UnsupportedPrimitive);
// bayesopt
OBSPINN_DEFINE_ERROR(SingularKernel);
OBSPINN_DEFINE_ERROR(IterationBudgetExceeded);
// report
OBSPINN_DEFINE_ERROR(ConstantTruth);
OBSPINN_DEFINE_ERROR(ZeroTruth);
OBSPINN_DEFINE_ERROR(IOError);

#undef OBSPINN_DEFINE_ERROR

/// Parse failure with a 1-based source position.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
              message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace obspinn
