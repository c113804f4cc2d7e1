#include "trajprop/error.hpp"

namespace trajprop {

void fail(const std::string& what) { throw Error(ErrorKind::kInvalidArgument, what); }

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kConfig:
      return 2;
    case ErrorKind::kLineage:
      return 3;
    case ErrorKind::kDivergence:
      return 4;
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kIo:
      break;
  }
  return 1;
}

}  // namespace trajprop
