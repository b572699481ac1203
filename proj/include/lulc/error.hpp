#pragma once

#include <stdexcept>
#include <string>

namespace lulc {

enum class ErrorKind {
  kEmptyGrid,
  kInvalidArgument,
  kInfeasibleScenario,
  kEpisodeFinished,
  kShapeMismatch,
  kNonFiniteLoss,
  kConfig,
  kCheckpoint,
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

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace lulc
