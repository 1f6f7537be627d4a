#ifndef POTACC_ERROR_HPP
#define POTACC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace potacc {

// Base class for all recoverable errors raised by the library. The CLI maps
// these to exit code 1; anything else is an internal error (exit code 2).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

#define POTACC_DEFINE_ERROR(NAME)                            \
  class NAME : public Error {                                \
   public:                                                   \
    explicit NAME(const std::string &msg)                    \
        : Error(std::string(#NAME) + ": " + msg) {}          \
  }

POTACC_DEFINE_ERROR(UnsupportedBitwidth);
POTACC_DEFINE_ERROR(AllZeroGroup);
POTACC_DEFINE_ERROR(NotAPoTWeight);
POTACC_DEFINE_ERROR(NotALevel);
POTACC_DEFINE_ERROR(InvalidCode);
POTACC_DEFINE_ERROR(AccumulatorOverflow);
POTACC_DEFINE_ERROR(ShapeMismatch);
POTACC_DEFINE_ERROR(UnsupportedLayer);
POTACC_DEFINE_ERROR(SchemaError);
POTACC_DEFINE_ERROR(ChecksumMismatch);
POTACC_DEFINE_ERROR(VersionUnsupported);
POTACC_DEFINE_ERROR(StageError);
POTACC_DEFINE_ERROR(ConfigInvalid);
POTACC_DEFINE_ERROR(MissingCpuTime);
POTACC_DEFINE_ERROR(NegativePower);

#undef POTACC_DEFINE_ERROR

}  // namespace potacc

#endif  // POTACC_ERROR_HPP
