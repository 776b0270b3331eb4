#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace corrpersist {

enum class ErrorKind {
  Format,              // unparsable input (CSV syntax, bad number, bad date)
  Dataset,             // parsed input violates a data invariant
  Config,              // invalid parameters or configuration text
  Degenerate,          // numerically degenerate input (zero variance, single class)
  Size,                // structural size precondition (e.g. PMFG needs N >= 4)
  InsufficientHistory, // not enough preceding windows
  Incompatible,        // mismatched operands (node counts, lengths)
  Io,                  // filesystem failure
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Same error with a leading "context: " so callers can see which stage failed.
  Error with_context(const std::string& context) const {
    return Error(kind_, context + ": " + what());
  }

 private:
  ErrorKind kind_;
};

/// Sink for non-fatal diagnostics (dropped assets, robustness bounds, ...).
/// The default handler writes "warning: <msg>" to stderr.
using WarningHandler = std::function<void(const std::string&)>;

void warn(const std::string& message);

/// Installs a handler and returns the previous one. Passing an empty handler
/// restores the stderr default.
WarningHandler set_warning_handler(WarningHandler handler);

/// RAII capture of warnings, mostly for tests.
class ScopedWarningCapture {
 public:
  ScopedWarningCapture();
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(const std::string& needle) const;

 private:
  std::vector<std::string> messages_;
  WarningHandler previous_;
};

}  // namespace corrpersist
