// offtrack: multiagent trajectory imputation toolkit.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ot {

inline constexpr const char* kVersion = "0.1.0";

// Error taxonomy. The CLI maps ArgumentError/ParseError/SchemaError/ConfigError
// to exit code 1 (validation) and everything else to exit code 2 (runtime).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ArgumentError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct SchemaError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

#define OT_REQUIRE(cond, ExcType, msg)   \
  do {                                   \
    if (!(cond)) throw ExcType(msg);     \
  } while (0)

}  // namespace ot
