#pragma once

#include <stdexcept>
#include <string>

namespace phasebench {

// Root of every error thrown by the library. The CLI maps these to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PHASEBENCH_ERROR(Name)              \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

PHASEBENCH_ERROR(InvalidArgument);
PHASEBENCH_ERROR(HermitianViolation);
PHASEBENCH_ERROR(PlacementFailure);
PHASEBENCH_ERROR(TuningStall);
PHASEBENCH_ERROR(ZeroPower);
PHASEBENCH_ERROR(RankDeficient);
PHASEBENCH_ERROR(ZeroReference);
PHASEBENCH_ERROR(ParseError);
PHASEBENCH_ERROR(AntisymmetryViolation);
PHASEBENCH_ERROR(MissingN);
PHASEBENCH_ERROR(IoError);

#undef PHASEBENCH_ERROR

}  // namespace phasebench
