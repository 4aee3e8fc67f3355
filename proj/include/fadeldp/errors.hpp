#ifndef FADELDP_ERRORS_HPP
#define FADELDP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fadeldp {

// Error kinds map 1:1 onto CLI exit codes.
enum class ErrorKind {
  config = 2,      // bad config / bad arguments
  refusal = 3,     // model not dissipative for the requested eps
  divergence = 4,  // numerical blow-up
  infeasible = 5,  // rate problem with empty constraint set
  invalid = 6,     // invalid value object (segment, measure, ...)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

}  // namespace fadeldp

#endif
