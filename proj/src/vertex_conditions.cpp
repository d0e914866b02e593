#include "thinfiber/vertex_conditions.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace thinfiber {

UnitarySymmetricReport check_unitary_symmetric(const Matrix& t, double tol) {
  if (t.rows() != t.cols()) throw validation_error("check_unitary_symmetric: matrix not square");
  UnitarySymmetricReport rep;
  const auto n = t.rows();
  rep.unitarity_defect = operator_norm(Matrix(t.adjoint() * t - Matrix::Identity(n, n)));
  rep.symmetry_defect = operator_norm(Matrix(t - t.transpose()));
  rep.pass = rep.unitarity_defect <= tol && rep.symmetry_defect <= tol;
  return rep;
}

ProjectionPair threshold_projection(const Matrix& t0, double snap_tol) {
  if (t0.rows() != t0.cols()) throw validation_error("threshold_projection: matrix not square");
  const double imag_resid = t0.imag().cwiseAbs().maxCoeff();
  if (imag_resid > snap_tol) {
    std::ostringstream os;
    os << "threshold_projection: imaginary residue " << imag_resid
       << " exceeds tolerance " << snap_tol << " (T(lambda0) must be real)";
    throw numerical_error(os.str());
  }
  RealMatrix re = 0.5 * (t0.real() + t0.real().transpose());
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(re);
  ProjectionPair pp;
  pp.rotation = es.eigenvectors();
  pp.signs = RealVector(re.rows());
  for (int s = 0; s < re.rows(); ++s) {
    double nu = es.eigenvalues()(s);
    double snapped = nu < 0.0 ? -1.0 : 1.0;
    if (std::abs(nu - snapped) > snap_tol) {
      std::ostringstream os;
      os << "threshold_projection: eigenvalue " << nu << " is " << std::abs(nu - snapped)
         << " from +-1, beyond snap tolerance " << snap_tol
         << " (not a legitimate threshold matrix)";
      throw numerical_error(os.str());
    }
    pp.signs(s) = snapped;
  }
  // P = C * diag((1-nu)/2) * C^T, the orthogonal projection onto the
  // nu = -1 eigenspace. The similarity form is the symmetric reading of
  // the (1/2)(I - D) C^{-1} construction.
  RealMatrix d = ((RealVector::Ones(re.rows()) - pp.signs) * 0.5).asDiagonal();
  pp.projection = pp.rotation * d * pp.rotation.transpose();
  pp.rank = static_cast<int>((pp.signs.array() < 0.0).count());
  return pp;
}

ScatteringMatrixFn ScatteringMatrixFn::constant(const Matrix& t, double lambda0,
                                                double lambda1) {
  if (t.rows() != t.cols()) throw validation_error("ScatteringMatrixFn: matrix not square");
  ScatteringMatrixFn fn;
  fn.dim = static_cast<int>(t.rows());
  fn.lambda0 = lambda0;
  fn.lambda1 = lambda1;
  fn.eval = [t](Complex) { return t; };
  return fn;
}

ScatteringMatrixFn ScatteringMatrixFn::table(const std::vector<double>& lambdas,
                                             const std::vector<Matrix>& ts,
                                             double lambda0) {
  if (lambdas.size() != ts.size() || lambdas.size() < 2)
    throw validation_error("ScatteringMatrixFn::table: need >= 2 samples with matching sizes");
  const int d = static_cast<int>(ts.front().rows());
  for (const auto& t : ts)
    if (t.rows() != d || t.cols() != d)
      throw validation_error("ScatteringMatrixFn::table: inconsistent matrix sizes");
  std::vector<double> zs(lambdas.size());
  for (size_t i = 0; i < lambdas.size(); ++i) {
    if (lambdas[i] < lambda0)
      throw validation_error("ScatteringMatrixFn::table: sample below lambda0");
    zs[i] = std::sqrt(lambdas[i] - lambda0);
    if (i > 0 && zs[i] <= zs[i - 1])
      throw validation_error("ScatteringMatrixFn::table: lambdas must be increasing");
  }
  ScatteringMatrixFn fn;
  fn.dim = d;
  fn.lambda0 = lambda0;
  fn.lambda1 = lambdas.back();
  // Entrywise Lagrange interpolation on the three nearest nodes in z.
  fn.eval = [zs, ts, lambda0, d](Complex lambda) {
    Complex z = sqrt_upper(lambda - lambda0);
    size_t i0 = 0;
    double best = std::abs(z - Complex(zs[0]));
    for (size_t i = 1; i < zs.size(); ++i) {
      double dist = std::abs(z - Complex(zs[i]));
      if (dist < best) { best = dist; i0 = i; }
    }
    size_t lo = i0 == 0 ? 0 : i0 - 1;
    size_t hi = std::min(lo + 2, zs.size() - 1);
    lo = hi >= 2 ? hi - 2 : 0;
    Matrix out = Matrix::Zero(d, d);
    for (size_t i = lo; i <= hi; ++i) {
      Complex w(1.0, 0.0);
      for (size_t j = lo; j <= hi; ++j)
        if (j != i) w *= (z - Complex(zs[j])) / Complex(zs[i] - zs[j]);
      out += w * ts[i];
    }
    return out;
  };
  return fn;
}

VertexCondition VertexCondition::dirichlet(int dim) {
  VertexCondition c;
  c.kind_ = Kind::dirichlet;
  c.dim_ = dim;
  return c;
}

VertexCondition VertexCondition::neumann(int dim) {
  VertexCondition c;
  c.kind_ = Kind::neumann;
  c.dim_ = dim;
  return c;
}

VertexCondition VertexCondition::kirchhoff(int dim) {
  VertexCondition c;
  c.kind_ = Kind::kirchhoff;
  c.dim_ = dim;
  return c;
}

VertexCondition VertexCondition::generalized_kirchhoff(RealVector rho) {
  if ((rho.array() <= 0.0).any())
    throw validation_error("generalized_kirchhoff: weights must be positive");
  VertexCondition c;
  c.kind_ = Kind::generalized_kirchhoff;
  c.dim_ = static_cast<int>(rho.size());
  c.rho_ = std::move(rho);
  return c;
}

VertexCondition VertexCondition::scattering_gc(ScatteringMatrixFn t) {
  if (!t.eval) throw validation_error("scattering_gc: empty evaluator");
  VertexCondition c;
  c.kind_ = Kind::scattering_gc;
  c.dim_ = t.dim;
  c.tfn_ = std::move(t);
  return c;
}

VertexCondition VertexCondition::projection_dn(ProjectionPair p) {
  VertexCondition c;
  c.kind_ = Kind::projection_dn;
  c.dim_ = static_cast<int>(p.projection.rows());
  c.proj_ = std::move(p);
  return c;
}

const char* VertexCondition::kind_name() const {
  switch (kind_) {
    case Kind::dirichlet: return "dirichlet";
    case Kind::neumann: return "neumann";
    case Kind::kirchhoff: return "kirchhoff";
    case Kind::generalized_kirchhoff: return "generalized_kirchhoff";
    case Kind::scattering_gc: return "scattering_gc";
    case Kind::projection_dn: return "projection_dn";
  }
  return "?";
}

ProjectionPair VertexCondition::threshold_form(double snap_tol) const {
  switch (kind_) {
    case Kind::dirichlet:
      return threshold_projection(Matrix(-Matrix::Identity(dim_, dim_)), snap_tol);
    case Kind::neumann:
      return threshold_projection(Matrix(Matrix::Identity(dim_, dim_)), snap_tol);
    case Kind::kirchhoff: {
      Matrix t = (2.0 / dim_) * Matrix::Ones(dim_, dim_) - Matrix::Identity(dim_, dim_);
      return threshold_projection(t, snap_tol);
    }
    case Kind::generalized_kirchhoff: {
      // Flux-normalized star matrix 2 sqrt(r_p r_j)/sum r - delta.
      RealVector q = rho_.array().sqrt();
      q.normalize();
      Matrix t = 2.0 * (q * q.transpose()).cast<Complex>() - Matrix::Identity(dim_, dim_);
      return threshold_projection(t, snap_tol);
    }
    case Kind::scattering_gc:
      return threshold_projection(tfn_.eval(Complex(tfn_.lambda0, 0.0)), snap_tol);
    case Kind::projection_dn:
      return proj_;
  }
  throw validation_error("threshold_form: unknown kind");
}

namespace {

ConditionRows projection_rows(const ProjectionPair& p) {
  // Rows in the rotated frame: Dirichlet components first (C^T zeta)_s = 0
  // for nu_s = -1, then Neumann components (C^T zeta')_s = 0.
  const int d = static_cast<int>(p.signs.size());
  ConditionRows rows;
  rows.val = Matrix::Zero(d, d);
  rows.der = Matrix::Zero(d, d);
  int r = 0;
  for (int s = 0; s < d; ++s)
    if (p.signs(s) < 0.0) rows.val.row(r++) = p.rotation.col(s).transpose().cast<Complex>();
  for (int s = 0; s < d; ++s)
    if (p.signs(s) > 0.0) rows.der.row(r++) = p.rotation.col(s).transpose().cast<Complex>();
  return rows;
}

}  // namespace

ConditionRows condition_rows_mu(const VertexCondition& cond, Complex mu, double eps) {
  const int d = cond.dim();
  ConditionRows rows;
  rows.val = Matrix::Zero(d, d);
  rows.der = Matrix::Zero(d, d);
  switch (cond.kind()) {
    case VertexCondition::Kind::dirichlet:
      rows.val = Matrix::Identity(d, d);
      return rows;
    case VertexCondition::Kind::neumann:
      rows.der = Matrix::Identity(d, d);
      return rows;
    case VertexCondition::Kind::kirchhoff:
    case VertexCondition::Kind::generalized_kirchhoff: {
      // d-1 continuity rows, then one flux row.
      for (int r = 0; r + 1 < d; ++r) {
        rows.val(r, r) = 1.0;
        rows.val(r, r + 1) = -1.0;
      }
      for (int j = 0; j < d; ++j)
        rows.der(d - 1, j) = cond.kind() == VertexCondition::Kind::kirchhoff
                                 ? 1.0
                                 : cond.rho()(j);
      return rows;
    }
    case VertexCondition::Kind::projection_dn:
      return projection_rows(cond.projection());
    case VertexCondition::Kind::scattering_gc: {
      if (eps == 0.0 || std::abs(mu) < kMuMinCutoff)
        return projection_rows(cond.threshold_form());
      const ScatteringMatrixFn& fn = cond.matrix_fn();
      Complex lambda = Complex(fn.lambda0, 0.0) + eps * eps * mu;
      if (std::isfinite(fn.lambda1) && lambda.real() > fn.lambda1 + 1e-12)
        throw validation_error("condition_rows: lambda outside the T validity window");
      Matrix t = fn.eval(lambda);
      Complex z = sqrt_upper(mu);
      Matrix id = Matrix::Identity(d, d);
      rows.der = Complex(0.0, 1.0) * (id + t);
      rows.val = -z * (id - t);
      // The normalization that keeps the rows meaningful as mu -> 0.
      for (int r = 0; r < d; ++r) {
        double nrm = std::sqrt(rows.val.row(r).squaredNorm() + rows.der.row(r).squaredNorm());
        if (nrm < 1e-14) throw numerical_error("condition_rows: vanishing row (degenerate T)");
        rows.val.row(r) /= nrm;
        rows.der.row(r) /= nrm;
      }
      // Detect rank deficiency at this lambda.
      Matrix a = rows.stacked();
      Eigen::JacobiSVD<Matrix> svd(a);
      if (svd.singularValues()(d - 1) < 1e-10 * svd.singularValues()(0))
        throw numerical_error("condition_rows: rank-deficient condition at requested lambda");
      return rows;
    }
  }
  throw validation_error("condition_rows: unknown kind");
}

ConditionRows condition_rows(const VertexCondition& cond, Complex lambda,
                             double lambda0, double eps) {
  if (eps < 0.0) throw validation_error("condition_rows: eps must be >= 0");
  if (eps == 0.0) return condition_rows_mu(cond, Complex(0.0), 0.0);
  Complex mu = (lambda - lambda0) / (eps * eps);
  return condition_rows_mu(cond, mu, eps);
}

Matrix vertex_scattering_amplitudes(const VertexCondition& cond, Complex mu, double eps) {
  const int d = cond.dim();
  if (std::abs(mu) < kMuMinCutoff)
    throw validation_error("vertex_scattering_amplitudes: |mu| below branch cutoff");
  ConditionRows rows = condition_rows_mu(cond, mu, eps);
  Complex z = sqrt_upper(mu);
  // zeta(0) = e_p + beta, zeta'(0) = i z (beta - e_p):
  // [A_val + i z A_der] beta = -[A_val - i z A_der] e_p.
  Matrix lhs = rows.val + Complex(0.0, 1.0) * z * rows.der;
  Matrix rhs = -(rows.val - Complex(0.0, 1.0) * z * rows.der);
  Eigen::PartialPivLU<Matrix> lu(lhs);
  double scale = lhs.cwiseAbs().maxCoeff();
  if (std::abs(lu.determinant()) < 1e-12 * std::pow(scale, d))
    throw numerical_error("vertex_scattering_amplitudes: rank-deficient condition system");
  Matrix beta = lu.solve(rhs);
  // Row p of the result is the response to incidence on edge p.
  return beta.transpose();
}

Matrix scattering_matrix_of_condition(const VertexCondition& cond, Complex mu, double eps) {
  Matrix t = vertex_scattering_amplitudes(cond, mu, eps);
  if (cond.kind() == VertexCondition::Kind::generalized_kirchhoff) {
    RealVector q = cond.rho().array().sqrt();
    Matrix s = t;
    for (int p = 0; p < t.rows(); ++p)
      for (int j = 0; j < t.cols(); ++j) s(p, j) = t(p, j) * q(j) / q(p);
    return s;
  }
  return t;
}

}  // namespace thinfiber
