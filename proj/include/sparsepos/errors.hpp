#pragma once

#include <stdexcept>
#include <string>

namespace sparsepos {

// Three failure families; the CLI maps them to exit codes 1, 2 and 3.
class InputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class PreconditionError : public std::runtime_error {
  public:
    PreconditionError(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

  private:
    std::string kind_;
};

class NumericalError : public std::runtime_error {
  public:
    NumericalError(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

  private:
    std::string kind_;
};

struct DimensionMismatch : InputError {
    explicit DimensionMismatch(const std::string& w) : InputError("DimensionMismatch: " + w) {}
};

struct NoRipOrder : PreconditionError {
    explicit NoRipOrder(const std::string& w) : PreconditionError("NoRipOrder", w) {}
};
struct RipViolation : PreconditionError {
    explicit RipViolation(const std::string& w) : PreconditionError("RipViolation", w) {}
};
struct UnsplittableTerm : PreconditionError {
    explicit UnsplittableTerm(const std::string& w) : PreconditionError("UnsplittableTerm", w) {}
};
struct DegreeExceedsSpec : PreconditionError {
    explicit DegreeExceedsSpec(const std::string& w) : PreconditionError("DegreeExceedsSpec", w) {}
};
struct EffcondViolated : PreconditionError {
    explicit EffcondViolated(const std::string& w) : PreconditionError("EffcondViolated", w) {}
};
struct NotBoundedBelow : PreconditionError {
    explicit NotBoundedBelow(const std::string& w) : PreconditionError("NotBoundedBelow", w) {}
};
struct NotPositive : PreconditionError {
    explicit NotPositive(const std::string& w) : PreconditionError("NotPositive", w) {}
};
struct NegativeOnInterval : PreconditionError {
    explicit NegativeOnInterval(const std::string& w) : PreconditionError("NegativeOnInterval", w) {}
};
struct NegativeNodeValue : PreconditionError {
    explicit NegativeNodeValue(const std::string& w) : PreconditionError("NegativeNodeValue", w) {}
};

struct ContractUnmet : NumericalError {
    ContractUnmet(double achieved, double demanded, const std::string& w)
        : NumericalError("ContractUnmet", w), achieved(achieved), demanded(demanded) {}
    double achieved;
    double demanded;
};
struct NumericalFailure : NumericalError {
    explicit NumericalFailure(const std::string& w) : NumericalError("NumericalFailure", w) {}
};
struct RCapExceeded : NumericalError {
    explicit RCapExceeded(const std::string& w) : NumericalError("RCapExceeded", w) {}
};

} // namespace sparsepos
