#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace fchq {

// Every failure raised by the library derives from Error; the concrete type
// names the violated contract so callers (and the CLI) can map it to an
// exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FCHQ_DEFINE_ERROR(Name)                      \
  class Name : public Error {                        \
   public:                                           \
    explicit Name(const std::string& what)           \
        : Error(std::string(#Name ": ") + what) {}   \
  }

FCHQ_DEFINE_ERROR(InvalidGrid);
FCHQ_DEFINE_ERROR(InvalidParams);
FCHQ_DEFINE_ERROR(NonFinite);
FCHQ_DEFINE_ERROR(SpectralLeak);
FCHQ_DEFINE_ERROR(BoundaryContamination);
FCHQ_DEFINE_ERROR(DilationRange);
FCHQ_DEFINE_ERROR(NoPohozaevTime);
FCHQ_DEFINE_ERROR(Overflow);
FCHQ_DEFINE_ERROR(UnknownModel);
FCHQ_DEFINE_ERROR(SeedFailure);
FCHQ_DEFINE_ERROR(NotAdmissible);
FCHQ_DEFINE_ERROR(DomainError);
FCHQ_DEFINE_ERROR(WindowTooSmall);
FCHQ_DEFINE_ERROR(NegativeTail);
FCHQ_DEFINE_ERROR(TooLarge);
FCHQ_DEFINE_ERROR(UnsupportedDim);
FCHQ_DEFINE_ERROR(SnapshotError);
FCHQ_DEFINE_ERROR(ConfigError);

#undef FCHQ_DEFINE_ERROR

/// Short %g rendering for messages; std::to_string prints small values as 0.
inline std::string num_str(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace fchq
