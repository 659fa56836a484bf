#pragma once

#include <stdexcept>
#include <string>

namespace poetopics {

enum class ErrorKind {
  Validation,  // bad configuration or arguments
  Runtime,     // the data cannot be processed as requested
  Io,          // file system failures
  Format,      // malformed or incompatible files
};

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

}  // namespace poetopics
