#pragma once

#include <stdexcept>
#include <string>

namespace geneprofile {

// Bad configuration, design, conditions or profile input. The CLI maps this
// to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or insufficient expression data. The CLI maps this to exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace geneprofile
