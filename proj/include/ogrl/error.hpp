#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ogrl {

// Base of every error raised by the library. The CLI maps these to a single
// `error:` diagnostic line.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define OGRL_DEFINE_ERROR(Name)              \
  class Name : public Error {                \
   public:                                   \
    explicit Name(const std::string& what)   \
        : Error(#Name ": " + what) {}        \
  };

OGRL_DEFINE_ERROR(InvalidOpinion)
OGRL_DEFINE_ERROR(TotalConflict)
OGRL_DEFINE_ERROR(OutOfRange)
OGRL_DEFINE_ERROR(BadCalibration)
OGRL_DEFINE_ERROR(OutOfScale)
OGRL_DEFINE_ERROR(Unsatisfiable)
OGRL_DEFINE_ERROR(InvalidState)
OGRL_DEFINE_ERROR(InvalidMap)
OGRL_DEFINE_ERROR(DegenerateRow)
OGRL_DEFINE_ERROR(ZeroProbability)
OGRL_DEFINE_ERROR(EmptyInput)
OGRL_DEFINE_ERROR(ConfigError)
OGRL_DEFINE_ERROR(IoError)

#undef OGRL_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("ParseError: line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ogrl
