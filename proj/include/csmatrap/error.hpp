#pragma once

#include <stdexcept>
#include <string>

namespace csmatrap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CSMATRAP_ERROR(Name)            \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

CSMATRAP_ERROR(ParseError);
CSMATRAP_ERROR(ValidationError);
CSMATRAP_ERROR(InvalidSize);
CSMATRAP_ERROR(InvalidParameter);
CSMATRAP_ERROR(StateSpaceTooLarge);
CSMATRAP_ERROR(UnknownLink);
CSMATRAP_ERROR(ColumnOutOfRange);
CSMATRAP_ERROR(LevelOutOfRange);
CSMATRAP_ERROR(SingularSystem);
CSMATRAP_ERROR(NestedTraps);
CSMATRAP_ERROR(InvalidConfig);
CSMATRAP_ERROR(InsufficientSamples);
CSMATRAP_ERROR(IoError);

#undef CSMATRAP_ERROR

}  // namespace csmatrap
