#ifndef THINFIBER_TYPES_HPP
#define THINFIBER_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace thinfiber {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kInfiniteLength = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

// Branch-point guard: sqrt-based assembly refuses |mu| below this.
inline constexpr double kMuMinCutoff = 1e-6;

// Resonance floor: |det M| below this times the Hadamard scale of M
// counts as "at an eigenvalue".
inline constexpr double kResonanceFloor = 1e-8;

// Principal square root, branch cut on the negative real axis.
// On the cut the +i side is taken, so real mu > 0 gives the positive
// root and real mu < 0 gives +i*sqrt(|mu|) (the lambda+i0 convention).
inline Complex sqrt_upper(Complex mu) {
  Complex r = std::sqrt(mu);
  if (mu.imag() == 0.0 && mu.real() < 0.0 && r.imag() < 0.0) r = -r;
  return r;
}

// Thrown for malformed inputs (schema violations, bad parameters).
class validation_error : public std::invalid_argument {
 public:
  explicit validation_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Thrown for numerical failures: resonance proximity, rank deficiency,
// non-convergent iterations. Distinct from validation so callers can
// map the two onto different exit codes.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Operator 2-norm via SVD. Small dense matrices only.
inline double operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return a.jacobiSvd().singularValues()(0);
}

inline double operator_norm(const RealMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.jacobiSvd().singularValues()(0);
}

// Entire functions c(mu,t) = cos(sqrt(mu) t), s(mu,t) = sin(sqrt(mu) t)/sqrt(mu).
// Both are analytic in mu (no branch), real for real mu, and satisfy
// c' = -mu*s, s' = c. Used by the real-basis secular assembly.
inline Complex phi_c(Complex mu, double t) {
  Complex z = std::sqrt(mu);
  return std::cos(z * t);
}

inline Complex phi_s(Complex mu, double t) {
  Complex z = std::sqrt(mu);
  Complex zt = z * t;
  if (std::abs(zt) < 1e-6) {
    Complex x2 = zt * zt;
    return t * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
  }
  return std::sin(zt) / z;
}

}  // namespace thinfiber

#endif  // THINFIBER_TYPES_HPP
