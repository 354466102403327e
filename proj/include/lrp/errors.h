#ifndef LRP_ERRORS_H_
#define LRP_ERRORS_H_

#include <stdexcept>
#include <string>

namespace lrp {

// Invalid argument outside an operation's domain (bad marks, unknown vertex,
// radius beyond the window, malformed input file, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The conductance-biased walk is not defined at a vertex (no incident
// conductance, or infinite total conductance). Such clusters are declared
// transient.
class UndefinedWalkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical routine failed where the mathematics says it cannot.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace lrp

#endif  // LRP_ERRORS_H_
