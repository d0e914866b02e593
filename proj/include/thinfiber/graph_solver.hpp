#ifndef THINFIBER_GRAPH_SOLVER_HPP
#define THINFIBER_GRAPH_SOLVER_HPP

#include <optional>
#include <vector>

#include "thinfiber/graph.hpp"
#include "thinfiber/types.hpp"

namespace thinfiber {

// Point on the graph: local coordinate t on an edge.
struct GraphPoint {
  int edge = 0;
  double t = 0.0;
};

// Sampled function on the graph: one uniform grid per edge starting at
// t = 0. Infinite edges carry a finite sample window.
struct GraphField {
  struct EdgeSamples {
    double h = 0.0;
    Vector values;  // values[i] at t = i*h
  };
  std::vector<EdgeSamples> edges;
};

// Secular linear system for the exponential ansatz
//   finite edge:   zeta = a e^{i z t} + b e^{-i z t}
//   infinite edge: zeta = a e^{i z t}            (outgoing only)
// with z = sqrt(mu). Rows are the vertex condition rows in vertex-id
// order; unknowns are (a, b) per finite edge then a per infinite edge,
// in edge-id order.
class SecularSystem {
 public:
  SecularSystem(const MetricGraph& graph, Complex mu, double eps);

  const Matrix& matrix() const { return m_; }
  Complex z() const { return z_; }
  Complex mu() const { return mu_; }
  int unknowns() const { return static_cast<int>(m_.rows()); }
  int amp_offset(int edge) const { return offset_[edge]; }
  int amp_count(int edge) const { return graph_->edge(edge).infinite() ? 1 : 2; }
  const MetricGraph& graph() const { return *graph_; }

  Complex determinant() const;
  // Hadamard bound (product of row norms); the resonance floor is
  // relative to this scale.
  double hadamard_scale() const;
  bool at_resonance() const;

  // Right-hand side for the free term delta_{m,n} e^{i z |t-t0|}/(2 i z).
  Vector rhs_point_source(GraphPoint source) const;
  // Right-hand side for a unit incident wave e^{-i z t} on infinite edge p.
  Vector rhs_incident(int incident_edge) const;

  Vector solve(const Vector& rhs) const;

 private:
  const MetricGraph* graph_;
  Complex mu_, z_;
  double eps_ = 0.0;
  Matrix m_;
  std::vector<int> offset_;
  mutable std::optional<Eigen::PartialPivLU<Matrix>> lu_;
};

SecularSystem assemble_secular(const MetricGraph& graph, Complex mu, double eps);
Complex secular_determinant(const MetricGraph& graph, Complex mu, double eps);

// Real cos/sin-basis determinant for compact graphs whose conditions are
// mu-independent and real (the eps = 0 self-adjoint problem). Entire in
// mu; real-valued for real mu. Used by the eigenvalue scan and by the
// disk-boundary winding count.
Complex secular_determinant_selfadjoint(const MetricGraph& graph, Complex mu);

struct SpectralWindow {
  double radius = 10.0;         // disk |mu| < radius
  double resonance_tol = 1e-9;  // contour-proximity tolerance
};

struct Eigenvalue {
  Complex mu;
  int multiplicity = 1;
};

// Zeros of the secular determinant in the disk.
//   eps = 0 (self-adjoint conditions): real-axis scan with sign-change
//   bisection on the real-basis determinant, multiplicities by winding
//   counts on small circles.
//   eps > 0: Delves-Lyness contours in the mu-plane around each eps = 0
//   base point, Newton-polished in z = sqrt(mu).
std::vector<Eigenvalue> eigenvalues_in_disk(const MetricGraph& graph,
                                            const SpectralWindow& window, double eps,
                                            double tol = 1e-10);

// Green function of (d^2/dt^2 + mu) on the graph with the vertex
// conditions; free term e^{i z |t-t0|}/(2 i z) on the source edge.
class GreenFunction {
 public:
  GreenFunction(const MetricGraph& graph, Complex mu, double eps, GraphPoint source);

  Complex operator()(GraphPoint x) const { return eval(x); }
  Complex eval(GraphPoint x) const;
  Complex mu() const { return mu_; }
  GraphPoint source() const { return source_; }
  const Vector& coefficients() const { return coeff_; }

 private:
  const MetricGraph* graph_;
  Complex mu_, z_;
  GraphPoint source_;
  Vector coeff_;
  std::vector<int> offset_;
};

GreenFunction green_function(const MetricGraph& graph, Complex mu, double eps,
                             GraphPoint source);

struct GraphScatteringSolution {
  int incident_edge = 0;
  Complex mu;
  // Per-edge amplitude pairs (outgoing, incoming) in the exponential
  // basis; on infinite edges the incoming slot is the incidence
  // delta_{p,j}, on finite edges it is the b coefficient.
  std::vector<Complex> outgoing;   // a_j
  std::vector<Complex> incoming;   // b_j (finite) or delta_{p,j} (infinite)
  // Row p of the graph-level scattering matrix: outgoing amplitudes on
  // the infinite edges, in edge order.
  Vector transmission_row;

  Complex eval(const MetricGraph& g, GraphPoint x) const;
};

GraphScatteringSolution scattering_solution(const MetricGraph& graph, Complex mu,
                                            double eps, int incident_edge);

// Assembles all incident rows into the graph-level scattering matrix
// (m x m, m = number of infinite edges, ordered by edge id).
Matrix graph_scattering_matrix(const MetricGraph& graph, Complex mu, double eps);

// zeta(x) = integral of G(x, y, mu) f(y) dy, composite Simpson per edge
// on the sampling grid of f. Output sampled on the same grids.
GraphField resolvent_apply(const MetricGraph& graph, Complex mu, double eps,
                           const GraphField& f);

// Basis solution psi_{p} on a star: delta_{p,j} e^{-i z t} + t_{p,j} e^{i z t}
// per edge j, built from the vertex amplitude frame.
struct BasisPsi {
  int p = 0;
  Complex mu;
  Vector amplitudes;  // t_{p,j}
  Complex eval(int edge, double t) const;
};

BasisPsi basis_psi(const VertexCondition& cond, int p, Complex mu, double eps = 0.0);

}  // namespace thinfiber

#endif  // THINFIBER_GRAPH_SOLVER_HPP
