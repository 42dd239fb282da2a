#ifndef RADELFT_ERRORS_HPP
#define RADELFT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace radelft {

enum class ErrorCode {
  InvalidArgument,
  Config,
  Io,
  Format,
  ShapeMismatch,
  EmptySet,
  UnsupportedGeometry,
  Numeric,
  Internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void throwError(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace radelft

#endif
