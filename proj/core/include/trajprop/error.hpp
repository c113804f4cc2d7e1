#pragma once

#include <stdexcept>
#include <string>

namespace trajprop {

/// Failure categories. The CLI maps these to process exit codes.
enum class ErrorKind {
  kInvalidArgument,
  kConfig,      // exit 2
  kLineage,     // exit 3
  kDivergence,  // exit 4
  kIo,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(const std::string& what);
[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(what);
}

int exit_code(ErrorKind kind) noexcept;

}  // namespace trajprop
