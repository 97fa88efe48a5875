#pragma once

#include <stdexcept>
#include <string>

namespace g2lab {

// Exit codes shared with the command-line harness.
enum class Status : int {
  Ok = 0,
  InvariantFailure = 1,
  NonConvergence = 2,
  Inadmissible = 3,
  Usage = 64,
};

class Error : public std::runtime_error {
 public:
  Error(Status s, const std::string& what) : std::runtime_error(what), status_(s) {}
  Status status() const noexcept { return status_; }

 private:
  Status status_;
};

// Violated precondition or malformed input.
struct PreconditionError : Error {
  explicit PreconditionError(const std::string& w) : Error(Status::Usage, w) {}
};

struct NonConvergenceError : Error {
  explicit NonConvergenceError(const std::string& w) : Error(Status::NonConvergence, w) {}
};

struct AdmissibilityError : Error {
  explicit AdmissibilityError(const std::string& w) : Error(Status::Inadmissible, w) {}
};

struct InvariantError : Error {
  explicit InvariantError(const std::string& w) : Error(Status::InvariantFailure, w) {}
};

// Operator has a nontrivial kernel (e.g. zero Bloch twist).
struct SingularSystemError : Error {
  SingularSystemError(const std::string& w, int kernel_dim)
      : Error(Status::NonConvergence, w), kernel_real_dim(kernel_dim) {}
  int kernel_real_dim;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw PreconditionError(msg);
}

}  // namespace g2lab
