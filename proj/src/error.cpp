#include "mesongs/error.hpp"

namespace mesongs {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Argument:
      return "argument error";
    case ErrorKind::Format:
      return "format error";
    case ErrorKind::Data:
      return "data error";
    case ErrorKind::CorruptStream:
      return "corrupt stream";
    case ErrorKind::Io:
      return "I/O error";
    case ErrorKind::Pipeline:
      return "pipeline error";
    case ErrorKind::DegenerateInput:
      return "degenerate input";
  }
  return "unknown error";
}

}  // namespace mesongs
