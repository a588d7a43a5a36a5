#pragma once

#include <stdexcept>
#include <string>

namespace blenderlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define BLENDERLAB_ERROR(Name)                                         \
  class Name : public Error {                                          \
   public:                                                             \
    using Error::Error;                                                \
    const char* kind() const noexcept override { return #Name; }       \
  }

BLENDERLAB_ERROR(DimensionError);
BLENDERLAB_ERROR(FrameError);
BLENDERLAB_ERROR(NotSameClass);
BLENDERLAB_ERROR(NumericalRankError);
BLENDERLAB_ERROR(StepSizeError);
BLENDERLAB_ERROR(ParamError);
BLENDERLAB_ERROR(ContractError);
BLENDERLAB_ERROR(ShapeError);
BLENDERLAB_ERROR(WindowError);
BLENDERLAB_ERROR(NoIsolatedFixedPoint);
BLENDERLAB_ERROR(IndexError);
BLENDERLAB_ERROR(RankError);
BLENDERLAB_ERROR(SubspaceClassError);

#undef BLENDERLAB_ERROR

}  // namespace blenderlab
