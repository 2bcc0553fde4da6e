#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace authdrift {

enum class ErrorKind {
  kInvalidArgument,
  kIo,
  kParse,
  kConstraint,  // data cannot satisfy a request (quota, pool size, ...)
  kProtocol,
  kTimeout,
  kUndefined,   // statistic undefined for the input (e.g. zero variance)
};

std::string_view ToString(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void Fail(ErrorKind kind, const std::string& message);

enum class LogLevel { kDebug = 0, kInfo = 1, kWarning = 2 };

using LogHandler = std::function<void(LogLevel, std::string_view)>;

// Process-wide. The default handler discards everything.
void SetLogHandler(LogHandler handler);
void Log(LogLevel level, std::string_view message);

}  // namespace authdrift
