#pragma once

#include <stdexcept>
#include <string>

namespace semrank {

/// Raised for malformed or inconsistent input data (corpus files, run files,
/// index images, vector files). CLI maps this to exit status 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace semrank
