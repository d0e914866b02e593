#ifndef THINFIBER_ROOTFIND_HPP
#define THINFIBER_ROOTFIND_HPP

#include <functional>
#include <vector>

#include "thinfiber/types.hpp"

namespace thinfiber {

using AnalyticFn = std::function<Complex(Complex)>;

// Argument-principle data on a circle |z - center| = radius.
// winding = number of zeros inside (f assumed analytic and pole-free),
// moments[m] = (1/2 pi i) oint z^m f'/f dz for m = 1..winding
// (power sums of the enclosed zeros).
struct ContourCount {
  int winding = 0;
  std::vector<Complex> moments;
  int samples = 0;     // points used on the final refinement level
  bool converged = false;
};

// Phase-increment winding count with adaptive doubling, starting from
// `initial_samples` points, doubling until the integer count stabilizes
// and every step's phase increment is below pi/2. Throws numerical_error
// if a sample lands within `zero_tol` (relative) of a zero of f.
ContourCount contour_count(const AnalyticFn& f, Complex center, double radius,
                           int max_moments, int initial_samples = 256,
                           int max_samples = 1 << 16);

// Newton iteration in z with a numerical derivative. Returns the refined
// root; sets *ok = false when the iteration fails to reach tol in
// max_iter steps.
Complex newton_polish(const AnalyticFn& f, Complex z0, double tol = 1e-12,
                      int max_iter = 50, bool* ok = nullptr);

// All zeros inside the circle, found by the Delves-Lyness moment method
// (power sums -> Newton identities -> companion-matrix roots) and
// polished by Newton. On contour-proximity failures the radius is
// nudged and the count retried, up to `retries` attempts.
struct ContourRoots {
  std::vector<Complex> roots;  // with multiplicity, polished
  int winding = 0;
  double used_radius = 0.0;
};

ContourRoots zeros_in_circle(const AnalyticFn& f, Complex center, double radius,
                             int retries = 4);

// Coefficients of the monic polynomial with the given power sums
// p_1..p_n (Newton's identities); returns c with
// z^n + c[0] z^{n-1} + ... + c[n-1].
std::vector<Complex> power_sums_to_monic(const std::vector<Complex>& p);

// Roots of a monic polynomial via the companion matrix.
std::vector<Complex> monic_roots(const std::vector<Complex>& coeffs);

}  // namespace thinfiber

#endif  // THINFIBER_ROOTFIND_HPP
