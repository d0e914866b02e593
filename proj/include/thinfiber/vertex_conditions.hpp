#ifndef THINFIBER_VERTEX_CONDITIONS_HPP
#define THINFIBER_VERTEX_CONDITIONS_HPP

#include <functional>
#include <optional>
#include <vector>

#include "thinfiber/types.hpp"

namespace thinfiber {

// Diagnostic report for the unitary-symmetric check. Defects are
// operator 2-norms of T*T - I and T - T^T.
struct UnitarySymmetricReport {
  double unitarity_defect = 0.0;
  double symmetry_defect = 0.0;
  bool pass = false;
};

UnitarySymmetricReport check_unitary_symmetric(const Matrix& t, double tol);

// Orthogonal projection data extracted from a threshold scattering
// matrix T(lambda0) = C diag(nu) C^T with nu_s = +-1. P projects onto
// the nu = -1 eigenspace (Dirichlet components in the rotated frame).
struct ProjectionPair {
  RealMatrix rotation;   // C, orthogonal, columns are eigenvectors
  RealVector signs;      // nu_s in {+1,-1}, column order of C
  RealMatrix projection; // P = C diag((1-nu)/2) C^T
  int rank = 0;          // Rank P

  RealMatrix complement() const {
    return RealMatrix::Identity(projection.rows(), projection.cols()) - projection;
  }
};

// Eigendecomposition of Re T0 with eigenvalues snapped to +-1.
// Throws numerical_error if an eigenvalue is farther than snap_tol from
// +-1 or if the imaginary residue of T0 exceeds snap_tol.
ProjectionPair threshold_projection(const Matrix& t0, double snap_tol = 1e-6);

// lambda-dependent scattering matrix with a validity window
// [lambda0, lambda1]. Evaluation must be observationally pure.
struct ScatteringMatrixFn {
  int dim = 0;
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  std::function<Matrix(Complex lambda)> eval;

  Matrix operator()(Complex lambda) const { return eval(lambda); }

  static ScatteringMatrixFn constant(const Matrix& t, double lambda0 = 0.0,
                                     double lambda1 = kInfiniteLength);
  // Entrywise polynomial interpolation in z = sqrt(lambda - lambda0).
  static ScatteringMatrixFn table(const std::vector<double>& lambdas,
                                  const std::vector<Matrix>& ts, double lambda0);
};

class VertexCondition {
 public:
  enum class Kind {
    dirichlet,
    neumann,
    kirchhoff,
    generalized_kirchhoff,
    scattering_gc,
    projection_dn,
  };

  static VertexCondition dirichlet(int dim = 1);
  static VertexCondition neumann(int dim = 1);
  static VertexCondition kirchhoff(int dim);
  // rho: positive flux weights, one per adjacent edge.
  static VertexCondition generalized_kirchhoff(RealVector rho);
  static VertexCondition scattering_gc(ScatteringMatrixFn t);
  static VertexCondition projection_dn(ProjectionPair p);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const RealVector& rho() const { return rho_; }
  const ScatteringMatrixFn& matrix_fn() const { return tfn_; }
  const ProjectionPair& projection() const { return proj_; }
  bool valid_at_v1() const { return kind_ == Kind::dirichlet || kind_ == Kind::neumann; }
  const char* kind_name() const;

  // Threshold Dirichlet/Neumann form of this condition (the eps = 0
  // limit). For scattering_gc this is threshold_projection(T(lambda0)).
  ProjectionPair threshold_form(double snap_tol = 1e-6) const;

 private:
  Kind kind_ = Kind::dirichlet;
  int dim_ = 1;
  RealVector rho_;
  ScatteringMatrixFn tfn_;
  ProjectionPair proj_;
};

// Condition rows A = [A_val | A_der] with A_val zeta(0) + A_der zeta'(0) = 0,
// zeta the ordered vector of edge traces at the vertex and zeta' the
// inward derivatives. mu is the spectral parameter of (d^2/dt^2 + mu).
//
// For scattering_gc at eps > 0 the rows are i(I + T(lambda)) zeta'
// - sqrt(mu) (I - T(lambda)) zeta with lambda = lambda0 + eps^2 mu,
// scaled to unit row norm; at eps = 0 (or |mu| below the branch cutoff)
// the threshold projection form is used. Classical conditions return
// their canonical unnormalized rows.
struct ConditionRows {
  Matrix val;  // d x d
  Matrix der;  // d x d
  Matrix stacked() const {
    Matrix a(val.rows(), val.cols() + der.cols());
    a << val, der;
    return a;
  }
};

ConditionRows condition_rows_mu(const VertexCondition& cond, Complex mu, double eps);

// Spec-shaped wrapper: lambda coordinates, mu = (lambda - lambda0)/eps^2.
ConditionRows condition_rows(const VertexCondition& cond, Complex lambda,
                             double lambda0, double eps);

// Outgoing amplitudes of the star-graph scattering problem for this
// condition: row p solves zeta_j = delta_{p,j} e^{-i sqrt(mu) t}
// + beta_j e^{+i sqrt(mu) t} against the condition rows. This is the
// raw amplitude frame used by basis_psi and the Green decomposition.
Matrix vertex_scattering_amplitudes(const VertexCondition& cond, Complex mu,
                                    double eps = 0.0);

// Scattering matrix of the condition. Equal to the amplitude frame
// except for generalized Kirchhoff with unequal weights, where the
// returned matrix is flux-normalized, S = D T D^{-1} with
// D = diag(sqrt(rho)); only that frame is unitary and symmetric.
Matrix scattering_matrix_of_condition(const VertexCondition& cond, Complex mu,
                                      double eps = 0.0);

}  // namespace thinfiber

#endif  // THINFIBER_VERTEX_CONDITIONS_HPP
