#pragma once

#include <stdexcept>
#include <string>

namespace layerprobe {

// Base for every error raised by the library. The CLI maps UsageError to
// exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LAYERPROBE_ERROR(Name)             \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

// tensor_store
LAYERPROBE_ERROR(FormatError);
LAYERPROBE_ERROR(ShapeError);
LAYERPROBE_ERROR(DataError);
LAYERPROBE_ERROR(IoError);
LAYERPROBE_ERROR(MismatchError);

// gdv_metric
LAYERPROBE_ERROR(InsufficientDataError);
LAYERPROBE_ERROR(SingletonClassError);
LAYERPROBE_ERROR(DegenerateLabelsError);
LAYERPROBE_ERROR(EmptyClassError);

// dimred
LAYERPROBE_ERROR(ContractError);
LAYERPROBE_ERROR(ConvergenceError);

// synthgen
LAYERPROBE_ERROR(SpecError);

// cli_report
LAYERPROBE_ERROR(ConsistencyError);
LAYERPROBE_ERROR(UsageError);

#undef LAYERPROBE_ERROR

/// Must be called from inside a catch block. Rethrows the in-flight library
/// error as the same type with `context` prepended to its message.
[[noreturn]] void rethrow_with_context(const std::string& context);

}  // namespace layerprobe
