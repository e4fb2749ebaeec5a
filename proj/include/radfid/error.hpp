#pragma once

#include <stdexcept>
#include <string>

namespace radfid {

// Contract violations: bad arguments, mismatched volume pairs, malformed
// or inconsistent input files. The CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem and serialization failures. The CLI maps these (and any other
// runtime error) to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace radfid
