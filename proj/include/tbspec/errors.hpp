#ifndef TBSPEC_ERRORS_HPP
#define TBSPEC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tbspec {

// Bad input: precondition violated, malformed configuration, model outside
// the admissible class.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical procedure could not deliver a trustworthy answer.
class NumericalFault : public std::runtime_error {
 public:
  explicit NumericalFault(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tbspec

#endif
