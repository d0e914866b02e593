#include "thinfiber/rootfind.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <climits>
#include <cmath>

namespace thinfiber {

namespace {

struct Samples {
  std::vector<Complex> z;
  std::vector<Complex> f;
};

Samples sample_circle(const AnalyticFn& f, Complex center, double radius, int n) {
  Samples s;
  s.z.resize(n);
  s.f.resize(n);
  for (int k = 0; k < n; ++k) {
    double th = 2.0 * kPi * k / n;
    s.z[k] = center + radius * Complex(std::cos(th), std::sin(th));
    s.f[k] = f(s.z[k]);
  }
  return s;
}

}  // namespace

ContourCount contour_count(const AnalyticFn& f, Complex center, double radius,
                           int max_moments, int initial_samples, int max_samples) {
  int n = initial_samples;
  int prev_winding = INT_MIN;
  ContourCount out;
  while (n <= max_samples) {
    Samples s = sample_circle(f, center, radius, n);
    double fscale = 0.0;
    for (const auto& v : s.f) fscale = std::max(fscale, std::abs(v));
    if (fscale == 0.0) throw numerical_error("contour_count: f vanishes on the contour");
    bool steps_ok = true;
    double total_arg = 0.0;
    for (int k = 0; k < n; ++k) {
      Complex a = s.f[k], b = s.f[(k + 1) % n];
      if (std::abs(a) < 1e-13 * fscale)
        throw numerical_error("contour_count: contour passes within tolerance of a zero");
      double darg = std::arg(b / a);
      if (std::abs(darg) > 0.5 * kPi) {
        steps_ok = false;
        break;
      }
      total_arg += darg;
    }
    if (steps_ok) {
      int winding = static_cast<int>(std::lround(total_arg / (2.0 * kPi)));
      if (std::abs(total_arg / (2.0 * kPi) - winding) > 0.05) {
        steps_ok = false;  // phase sum far from an integer; refine
      } else if (winding == prev_winding) {
        out.winding = winding;
        out.samples = n;
        out.converged = true;
        int m = std::min(max_moments, winding);
        out.moments.assign(m, Complex(0.0));
        // s_m = (1/2 pi i) sum z_mid^m Log(f_{k+1}/f_k)
        for (int k = 0; k < n; ++k) {
          Complex zm = 0.5 * (s.z[k] + s.z[(k + 1) % n]);
          Complex dlog = std::log(s.f[(k + 1) % n] / s.f[k]);
          Complex zp = zm;
          for (int q = 0; q < m; ++q) {
            out.moments[q] += zp * dlog;
            zp *= zm;
          }
        }
        for (auto& v : out.moments) v /= Complex(0.0, 2.0 * kPi);
        return out;
      } else {
        prev_winding = winding;
      }
    }
    n *= 2;
  }
  throw numerical_error("contour_count: winding number failed to stabilize");
}

Complex newton_polish(const AnalyticFn& f, Complex z0, double tol, int max_iter, bool* ok) {
  Complex z = z0;
  bool good = false;
  for (int it = 0; it < max_iter; ++it) {
    double step = 1e-7 * std::max(1.0, std::abs(z));
    Complex fp = (f(z + step) - f(z - step)) / (2.0 * step);
    Complex fv = f(z);
    if (std::abs(fp) == 0.0) break;
    Complex dz = fv / fp;
    z -= dz;
    if (std::abs(dz) <= tol * std::max(1.0, std::abs(z))) {
      good = true;
      break;
    }
  }
  if (ok) *ok = good;
  return z;
}

std::vector<Complex> power_sums_to_monic(const std::vector<Complex>& p) {
  const int n = static_cast<int>(p.size());
  std::vector<Complex> e(n + 1);
  e[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    Complex acc = 0.0;
    for (int i = 1; i <= k; ++i) acc += (i % 2 == 1 ? 1.0 : -1.0) * e[k - i] * p[i - 1];
    e[k] = acc / static_cast<double>(k);
  }
  // z^n - e1 z^{n-1} + e2 z^{n-2} - ...
  std::vector<Complex> c(n);
  for (int k = 1; k <= n; ++k) c[k - 1] = (k % 2 == 1 ? -1.0 : 1.0) * e[k];
  return c;
}

std::vector<Complex> monic_roots(const std::vector<Complex>& coeffs) {
  const int n = static_cast<int>(coeffs.size());
  if (n == 0) return {};
  if (n == 1) return {-coeffs[0]};
  Matrix comp = Matrix::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -coeffs[n - 1 - i];
  Eigen::ComplexEigenSolver<Matrix> es(comp);
  std::vector<Complex> roots(n);
  for (int i = 0; i < n; ++i) roots[i] = es.eigenvalues()(i);
  return roots;
}

ContourRoots zeros_in_circle(const AnalyticFn& f, Complex center, double radius,
                             int retries) {
  double r = radius;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    try {
      ContourCount cc = contour_count(f, center, r, /*max_moments=*/16);
      ContourRoots out;
      out.winding = cc.winding;
      out.used_radius = r;
      if (cc.winding == 0) return out;
      if (cc.winding > 16)
        throw numerical_error("zeros_in_circle: too many zeros in one contour; shrink the disk");
      std::vector<Complex> p(cc.moments.begin(), cc.moments.begin() + cc.winding);
      std::vector<Complex> raw = monic_roots(power_sums_to_monic(p));
      for (Complex z0 : raw) {
        bool ok = false;
        Complex z = newton_polish(f, z0, 1e-12, 50, &ok);
        // Keep the polished root if Newton held it inside the contour;
        // clustered (multiple) roots may not polish, keep the estimate.
        if (!ok || std::abs(z - center) > 1.05 * r) z = z0;
        out.roots.push_back(z);
      }
      return out;
    } catch (const numerical_error&) {
      if (attempt == retries) throw;
      r *= (attempt % 2 == 0) ? 1.13 : 0.82;  // nudge off the bad contour
    }
  }
  throw numerical_error("zeros_in_circle: retry budget exhausted");
}

}  // namespace thinfiber
