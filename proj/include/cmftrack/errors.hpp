#pragma once

#include <stdexcept>
#include <string>

namespace cmft {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid schema definitions or schema/value lookups.
struct SchemaError : Error {
  using Error::Error;
};

// Malformed corpora, encodings, or serialized inputs.
struct DataError : Error {
  using Error::Error;
};

// Singular systems, non-finite values, failed factorizations.
struct NumericError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace cmft
