#pragma once

#include <stdexcept>
#include <string>

namespace colp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};
struct RankDeficient : Error {
  using Error::Error;
};
struct SingularGram : Error {
  using Error::Error;
};
struct NotUnderdetermined : Error {
  using Error::Error;
};
struct ConstantColumn : Error {
  using Error::Error;
};
struct NotPositiveDefinite : Error {
  using Error::Error;
};
struct DegenerateSignal : Error {
  using Error::Error;
};
struct InvalidRule : Error {
  using Error::Error;
};
struct InvalidSize : Error {
  using Error::Error;
};
struct NotCoverable : Error {
  using Error::Error;
};
struct SingleClassTraining : Error {
  using Error::Error;
};

}  // namespace colp
