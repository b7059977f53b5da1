#pragma once
// Outcome types shared by the low-level controllers of every environment.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rpn {

enum class ControllerFailure { Unreachable, InvalidGoal };

inline const char* to_string(ControllerFailure f) {
  return f == ControllerFailure::Unreachable ? "Unreachable" : "InvalidGoal";
}

template <class Action>
struct ControllerResult {
  bool success = false;
  std::vector<Action> actions;
  std::optional<ControllerFailure> failure;

  static ControllerResult fail(ControllerFailure f) { return ControllerResult{false, {}, f}; }
};

enum class EnvErrc { InvalidParams, UnknownEntity, CorruptSnapshot };

class EnvError : public std::runtime_error {
 public:
  EnvError(EnvErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  EnvErrc code() const { return code_; }

 private:
  EnvErrc code_;
};

}  // namespace rpn
