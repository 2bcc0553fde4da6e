#include "core/error.hpp"

#include <mutex>

namespace authdrift {
namespace {

std::mutex& HandlerMutex() {
  static std::mutex mu;
  return mu;
}

LogHandler& Handler() {
  static LogHandler handler;
  return handler;
}

}  // namespace

std::string_view ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kConstraint: return "constraint violation";
    case ErrorKind::kProtocol: return "protocol error";
    case ErrorKind::kTimeout: return "timeout";
    case ErrorKind::kUndefined: return "undefined";
  }
  return "unknown";
}

void Fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

void SetLogHandler(LogHandler handler) {
  std::lock_guard<std::mutex> lock(HandlerMutex());
  Handler() = std::move(handler);
}

void Log(LogLevel level, std::string_view message) {
  std::lock_guard<std::mutex> lock(HandlerMutex());
  if (Handler()) Handler()(level, message);
}

}  // namespace authdrift
