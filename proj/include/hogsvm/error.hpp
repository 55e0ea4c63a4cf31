#ifndef HOGSVM_ERROR_HPP
#define HOGSVM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hogsvm {

enum class ErrorKind {
  kInvalidArgument,
  kContract,
  kGeometry,
  kStreamProtocol,
  kParse,
  kIo,
  kDomain,
  kTraining,
};

const char* to_string(ErrorKind kind) noexcept;

// Single exception type for the core; the C API maps `kind()` onto status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace hogsvm

#endif  // HOGSVM_ERROR_HPP
