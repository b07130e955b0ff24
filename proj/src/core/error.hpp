#pragma once

#include <stdexcept>
#include <string>

namespace sdr {

enum class ErrorKind {
    Argument,   // bad parameter, inconsistent spec
    Parse,      // DSL / JSON / config syntax
    Dimension,  // shape mismatch
    Numeric,    // non-finite input, divergent estimate, infeasible solve
    Io,         // file system
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

}  // namespace sdr
