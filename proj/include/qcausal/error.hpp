// Exception taxonomy shared by every module.  All exceptions derive from
// qcausal::error so callers can catch the library as a whole; the concrete
// type tells the CLI which exit code to use.
#pragma once

#include <stdexcept>
#include <string>

namespace qcausal {

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed caller input: bad file contents, non-finite values, invalid
// configuration fields, missing values.  Messages name the offending
// file/column/row where known.
class input_error : public error {
 public:
  using error::error;
};

// Dimension mismatches and below-minimum sample counts.
class size_error : public error {
 public:
  using error::error;
};

// Structurally valid data the method cannot work with, e.g. a constant
// column whose centered kernel is identically zero.
class degenerate_data_error : public error {
 public:
  using error::error;
};

// Numerical breakdown inside an otherwise valid computation (non-PSD matrix
// beyond tolerance, failed eigendecomposition).
class numeric_error : public error {
 public:
  using error::error;
};

// Out-of-range qubit, column, or node index.
class index_error : public error {
 public:
  using error::error;
};

// Kernel family or option combination the implementation does not provide.
class unsupported_kernel_error : public error {
 public:
  using error::error;
};

}  // namespace qcausal
