#include "corrpersist/error.hpp"

#include <iostream>
#include <mutex>

namespace corrpersist {

namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler_slot() {
  static WarningHandler h;
  return h;
}

}  // namespace

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Format: return "format error";
    case ErrorKind::Dataset: return "dataset error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Degenerate: return "degenerate input";
    case ErrorKind::Size: return "size error";
    case ErrorKind::InsufficientHistory: return "insufficient history";
    case ErrorKind::Incompatible: return "incompatible operands";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

void warn(const std::string& message) {
  // Handlers run under the lock so they see warnings from worker threads one at a time.
  std::lock_guard<std::mutex> lock(handler_mutex());
  if (const auto& h = handler_slot()) {
    h(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard<std::mutex> lock(handler_mutex());
  WarningHandler previous = std::move(handler_slot());
  handler_slot() = std::move(handler);
  return previous;
}

ScopedWarningCapture::ScopedWarningCapture() {
  previous_ = set_warning_handler([this](const std::string& m) { messages_.push_back(m); });
}

ScopedWarningCapture::~ScopedWarningCapture() { set_warning_handler(std::move(previous_)); }

bool ScopedWarningCapture::contains(const std::string& needle) const {
  for (const auto& m : messages_) {
    if (m.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace corrpersist
