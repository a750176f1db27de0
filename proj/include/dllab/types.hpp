#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dllab {

using Complex = std::complex<double>;
using Vector  = Eigen::VectorXcd;
using Matrix  = Eigen::MatrixXcd;
using RealVec = Eigen::VectorXd;

enum class ErrorCode : int {
    InvalidArgument    = 1,
    DimensionMismatch  = 2,
    NotHermitian       = 3,
    ZeroTerm           = 4,
    DimensionCap       = 5,
    NotConverged       = 6,
    NotFrustrationFree = 7,
    DegenerateGround   = 8,
    Geometry           = 9,
    Parse              = 10,
    Io                 = 11,
};

const char *to_string(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &what) : std::runtime_error(what), code_(code) {}
    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

// Outcome of a conditional check. Bounds that only hold under a hypothesis are
// reported as HypothesisNotMet instead of being asserted.
enum class CheckStatus { Pass, Fail, HypothesisNotMet };

const char *to_string(CheckStatus s);

inline CheckStatus status_of(bool ok) { return ok ? CheckStatus::Pass : CheckStatus::Fail; }

} // namespace dllab
