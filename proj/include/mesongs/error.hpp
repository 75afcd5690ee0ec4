#pragma once

#include <stdexcept>
#include <string>

namespace mesongs {

enum class ErrorKind {
  Argument,
  Format,
  Data,
  CorruptStream,
  Io,
  Pipeline,
  DegenerateInput,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure raised by the codec carries a kind so the C layer can map it
// onto a status code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

[[noreturn]] inline void throw_argument(const std::string& message) {
  throw Error(ErrorKind::Argument, message);
}

[[noreturn]] inline void throw_corrupt(const std::string& message) {
  throw Error(ErrorKind::CorruptStream, message);
}

}  // namespace mesongs
