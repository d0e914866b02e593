#include "thinfiber/graph_solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "thinfiber/rootfind.hpp"

namespace thinfiber {

namespace {

constexpr Complex kI(0.0, 1.0);

// Value/derivative trace of one exponential-basis unknown at an edge
// end. Derivatives are taken inward (into the edge from that end).
struct TraceCoef {
  // coefficient of each unknown of the edge: (a[, b])
  Complex val[2];
  Complex der[2];
  int count;
};

TraceCoef exp_trace(const EdgeRecord& e, EdgeEnd end, Complex z) {
  TraceCoef tc{};
  if (e.infinite()) {
    tc.count = 1;
    tc.val[0] = 1.0;
    tc.der[0] = kI * z;
    return tc;
  }
  tc.count = 2;
  if (end == EdgeEnd::start) {
    tc.val[0] = 1.0;
    tc.val[1] = 1.0;
    tc.der[0] = kI * z;
    tc.der[1] = -kI * z;
  } else {
    Complex ep = std::exp(kI * z * e.length);
    Complex em = std::exp(-kI * z * e.length);
    tc.val[0] = ep;
    tc.val[1] = em;
    tc.der[0] = -kI * z * ep;
    tc.der[1] = kI * z * em;
  }
  return tc;
}

// Real-basis trace: zeta = c*C(t) + s*S(t), C = cos(sqrt(mu) t),
// S = sin(sqrt(mu) t)/sqrt(mu). Entire in mu.
TraceCoef real_trace(const EdgeRecord& e, EdgeEnd end, Complex mu) {
  if (e.infinite())
    throw validation_error("real-basis assembly requires a compact graph");
  TraceCoef tc{};
  tc.count = 2;
  if (end == EdgeEnd::start) {
    tc.val[0] = 1.0;
    tc.val[1] = 0.0;
    tc.der[0] = 0.0;
    tc.der[1] = 1.0;
  } else {
    Complex c = phi_c(mu, e.length);
    Complex s = phi_s(mu, e.length);
    tc.val[0] = c;
    tc.val[1] = s;
    tc.der[0] = mu * s;   // -(d/dt) cos = sqrt(mu) sin = mu * S
    tc.der[1] = -c;       // -(d/dt) S = -C
  }
  return tc;
}

std::vector<int> unknown_offsets(const MetricGraph& g) {
  std::vector<int> off(g.num_edges());
  int n = 0;
  for (int e = 0; e < g.num_edges(); ++e) {
    off[e] = n;
    n += g.edge(e).infinite() ? 1 : 2;
  }
  return off;
}

ConditionRows rows_for_vertex(const VertexRecord& v, Complex mu, double eps) {
  if (v.is_v1()) {
    // B_e condition at a free end.
    ConditionRows r;
    r.val = Matrix::Zero(1, 1);
    r.der = Matrix::Zero(1, 1);
    if (v.condition.kind() == VertexCondition::Kind::dirichlet)
      r.val(0, 0) = 1.0;
    else
      r.der(0, 0) = 1.0;
    return r;
  }
  return condition_rows_mu(v.condition, mu, eps);
}

}  // namespace

SecularSystem::SecularSystem(const MetricGraph& graph, Complex mu, double eps)
    : graph_(&graph), mu_(mu), z_(sqrt_upper(mu)), eps_(eps) {
  if (std::abs(mu) < kMuMinCutoff && eps > 0.0)
    throw validation_error("assemble_secular: |mu| below the branch cutoff");
  offset_ = unknown_offsets(graph);
  int n = 0;
  for (int e = 0; e < graph.num_edges(); ++e) n += amp_count(e);
  m_ = Matrix::Zero(n, n);
  int row0 = 0;
  for (const auto& v : graph.vertices()) {
    ConditionRows cr = rows_for_vertex(v, mu, eps);
    const int d = v.degree();
    for (int s = 0; s < d; ++s) {
      const AdjacentEnd& ae = v.adjacency[s];
      TraceCoef tc = exp_trace(graph.edge(ae.edge), ae.end, z_);
      for (int r = 0; r < d; ++r)
        for (int u = 0; u < tc.count; ++u)
          m_(row0 + r, offset_[ae.edge] + u) +=
              cr.val(r, s) * tc.val[u] + cr.der(r, s) * tc.der[u];
    }
    row0 += d;
  }
}

Complex SecularSystem::determinant() const { return m_.determinant(); }

double SecularSystem::hadamard_scale() const {
  double s = 1.0;
  for (int r = 0; r < m_.rows(); ++r) s *= m_.row(r).norm();
  return s;
}

bool SecularSystem::at_resonance() const {
  return std::abs(determinant()) < kResonanceFloor * hadamard_scale();
}

Vector SecularSystem::rhs_point_source(GraphPoint source) const {
  const EdgeRecord& es = graph_->edge(source.edge);
  const double t0 = source.t;
  if (!(t0 > 0.0) || (!es.infinite() && !(t0 < es.length)))
    throw validation_error("point source must lie strictly inside an edge");
  Vector rhs = Vector::Zero(unknowns());
  int row0 = 0;
  for (const auto& v : graph_->vertices()) {
    ConditionRows cr = rows_for_vertex(v, mu_, eps_);
    const int d = v.degree();
    for (int s = 0; s < d; ++s) {
      const AdjacentEnd& ae = v.adjacency[s];
      if (ae.edge != source.edge) continue;
      // Free term e^{i z |t - t0|}/(2 i z): outgoing from the source in
      // both directions along the edge.
      double dist = ae.end == EdgeEnd::start ? t0 : es.length - t0;
      Complex g = std::exp(kI * z_ * dist) / (2.0 * kI * z_);
      Complex dg = -std::exp(kI * z_ * dist) / 2.0;  // inward derivative
      for (int r = 0; r < d; ++r)
        rhs(row0 + r) -= cr.val(r, s) * g + cr.der(r, s) * dg;
    }
    row0 += d;
  }
  return rhs;
}

Vector SecularSystem::rhs_incident(int incident_edge) const {
  if (!graph_->edge(incident_edge).infinite())
    throw validation_error("incident edge must be infinite");
  Vector rhs = Vector::Zero(unknowns());
  int row0 = 0;
  for (const auto& v : graph_->vertices()) {
    ConditionRows cr = rows_for_vertex(v, mu_, eps_);
    const int d = v.degree();
    for (int s = 0; s < d; ++s) {
      const AdjacentEnd& ae = v.adjacency[s];
      if (ae.edge != incident_edge) continue;
      // Incident wave e^{-i z t}: val 1, inward derivative -i z at t=0.
      for (int r = 0; r < d; ++r)
        rhs(row0 + r) -= cr.val(r, s) * Complex(1.0) + cr.der(r, s) * (-kI * z_);
    }
    row0 += d;
  }
  return rhs;
}

Vector SecularSystem::solve(const Vector& rhs) const {
  if (!lu_) lu_.emplace(m_);
  return lu_->solve(rhs);
}

SecularSystem assemble_secular(const MetricGraph& graph, Complex mu, double eps) {
  for (const auto& v : graph.vertices())
    (void)v.condition;  // conditions are mandatory by construction
  SecularSystem sys(graph, mu, eps);
  return sys;
}

Complex secular_determinant(const MetricGraph& graph, Complex mu, double eps) {
  return SecularSystem(graph, mu, eps).determinant();
}

Complex secular_determinant_selfadjoint(const MetricGraph& graph, Complex mu) {
  if (!graph.compact())
    throw validation_error("secular_determinant_selfadjoint: graph must be compact");
  std::vector<int> offset = unknown_offsets(graph);
  const int n = 2 * graph.num_edges();
  Matrix m = Matrix::Zero(n, n);
  int row0 = 0;
  for (const auto& v : graph.vertices()) {
    VertexCondition cond = v.condition;
    if (cond.kind() == VertexCondition::Kind::scattering_gc)
      cond = VertexCondition::projection_dn(cond.threshold_form());
    VertexRecord vv = v;
    vv.condition = cond;
    ConditionRows cr = rows_for_vertex(vv, Complex(0.0), 0.0);
    const int d = v.degree();
    for (int s = 0; s < d; ++s) {
      const AdjacentEnd& ae = v.adjacency[s];
      TraceCoef tc = real_trace(graph.edge(ae.edge), ae.end, mu);
      for (int r = 0; r < d; ++r)
        for (int u = 0; u < tc.count; ++u)
          m(row0 + r, offset[ae.edge] + u) +=
              cr.val(r, s) * tc.val[u] + cr.der(r, s) * tc.der[u];
    }
    row0 += d;
  }
  return m.determinant();
}

namespace {

bool selfadjoint_mu_independent(const MetricGraph& g) {
  for (const auto& v : g.vertices())
    if (v.condition.kind() == VertexCondition::Kind::scattering_gc) return false;
  return true;
}

// Bisection on the real-basis determinant in the variable u = sqrt(mu).
double bisect_root_u(const MetricGraph& g, double ua, double ub, double fa, double fb) {
  for (int it = 0; it < 200; ++it) {
    double um = 0.5 * (ua + ub);
    double fm = secular_determinant_selfadjoint(g, Complex(um * um)).real();
    if (fm == 0.0 || ub - ua < 1e-15 * std::max(1.0, um)) return um;
    if ((fa < 0.0) != (fm < 0.0)) {
      ub = um;
      fb = fm;
    } else {
      ua = um;
      fa = fm;
    }
  }
  return 0.5 * (ua + ub);
}

std::vector<Eigenvalue> cluster_roots(std::vector<Complex> roots, double tol) {
  std::vector<Eigenvalue> out;
  std::sort(roots.begin(), roots.end(),
            [](Complex a, Complex b) { return a.real() < b.real(); });
  for (Complex r : roots) {
    bool merged = false;
    for (auto& ev : out) {
      if (std::abs(ev.mu - r) < tol * std::max(1.0, std::abs(r))) {
        ev.mu = (ev.mu * static_cast<double>(ev.multiplicity) + r) /
                static_cast<double>(ev.multiplicity + 1);
        ev.multiplicity += 1;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back({r, 1});
  }
  return out;
}

std::vector<Eigenvalue> eigenvalues_selfadjoint(const MetricGraph& graph, double c,
                                                double tol) {
  AnalyticFn f = [&graph](Complex mu) {
    return secular_determinant_selfadjoint(graph, mu);
  };

  const double lsum = std::max(graph.total_finite_length(), 1e-3);
  const double umax = std::sqrt(c);
  const double du = std::min(0.05, kPi / (12.0 * lsum));

  std::vector<double> candidates;

  // mu = 0 can be an eigenvalue (constant mode under Neumann/Kirchhoff).
  {
    ContourCount cc = contour_count(f, Complex(0.0), std::min(0.5 * du * du + 1e-8, 1e-4), 0);
    for (int k = 0; k < cc.winding; ++k) candidates.push_back(0.0);
  }

  int nsteps = static_cast<int>(std::ceil(umax / du));
  double fprev = f(Complex(du * du * 0.25)).real();  // just off the origin
  double uprev = 0.5 * du;
  std::vector<double> us{uprev};
  std::vector<double> fs{fprev};
  for (int i = 1; i <= nsteps; ++i) {
    double u = 0.5 * du + i * du;
    if (u > umax) u = umax;
    double fv = f(Complex(u * u)).real();
    us.push_back(u);
    fs.push_back(fv);
    if ((fprev < 0.0) != (fv < 0.0)) {
      double ur = bisect_root_u(graph, uprev, u, fprev, fv);
      candidates.push_back(ur * ur);
    }
    uprev = u;
    fprev = fv;
    if (u >= umax) break;
  }
  // Even-multiplicity zeros show as deep |D| dips without a sign change.
  for (size_t i = 1; i + 1 < fs.size(); ++i) {
    double a = std::abs(fs[i - 1]), b = std::abs(fs[i]), d2 = std::abs(fs[i + 1]);
    if (b < a && b < d2 && b < 0.25 * std::max(a, d2)) {
      bool near_known = false;
      for (double mu : candidates)
        if (std::abs(us[i] * us[i] - mu) < 4.0 * du * std::max(us[i], du)) near_known = true;
      if (near_known) continue;
      double r = std::max(2.0 * us[i] * 2.0 * du, 1e-6);
      ContourRoots cr = zeros_in_circle(f, Complex(us[i] * us[i]), r);
      for (Complex z : cr.roots) candidates.push_back(z.real());
    }
  }

  // Multiplicity of each located zero from a small-circle winding count.
  std::vector<Complex> all;
  std::vector<Eigenvalue> out;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end(),
                               [tol](double a, double b) {
                                 return std::abs(a - b) < tol * std::max(1.0, std::abs(b));
                               }),
                   candidates.end());
  int total = 0;
  for (double mu : candidates) {
    if (mu > c) continue;
    double r = std::max(1e-5, 1e-6 * std::max(1.0, mu));
    // widen until clear of the zero itself, capped well below neighbors
    ContourCount cc = contour_count(f, Complex(mu), r, 0);
    out.push_back({Complex(mu), std::max(1, cc.winding)});
    total += std::max(1, cc.winding);
  }

  // Cross-check against the disk-boundary winding count (the determinant
  // is entire in mu for the compact real-basis problem).
  for (int attempt = 0; attempt < 4; ++attempt) {
    try {
      ContourCount gc = contour_count(f, Complex(0.0), c * (1.0 - 0.003 * attempt), 0);
      if (gc.winding != total) {
        std::ostringstream os;
        os << "eigenvalues_in_disk: scan found " << total
           << " zeros but the disk boundary winding is " << gc.winding;
        throw numerical_error(os.str());
      }
      break;
    } catch (const numerical_error& e) {
      if (std::string(e.what()).find("winding is") != std::string::npos) throw;
      if (attempt == 3) break;  // boundary kept hitting zeros; scan stands
    }
  }
  return out;
}

}  // namespace

std::vector<Eigenvalue> eigenvalues_in_disk(const MetricGraph& graph,
                                            const SpectralWindow& window, double eps,
                                            double tol) {
  if (!graph.compact())
    throw validation_error(
        "eigenvalues_in_disk: only compact graphs carry discrete spectrum here");
  const double c = window.radius;
  if (eps == 0.0 || selfadjoint_mu_independent(graph))
    return eigenvalues_selfadjoint(graph, c, tol);

  // eps > 0: locate the eps = 0 base points, then count and refine the
  // perturbed zeros on contours around each base point (they sit within
  // O(eps) of the base points).
  std::vector<Eigenvalue> base = eigenvalues_selfadjoint(graph, c, tol);
  AnalyticFn f = [&graph, eps](Complex mu) {
    return SecularSystem(graph, mu, eps).determinant();
  };
  std::vector<Complex> roots;
  for (size_t j = 0; j < base.size(); ++j) {
    double muj = base[j].mu.real();
    if (muj < 10.0 * kMuMinCutoff) continue;  // branch-point neighborhood
    double gap = muj;  // distance to the branch point
    for (size_t k = 0; k < base.size(); ++k)
      if (k != j) gap = std::min(gap, std::abs(muj - base[k].mu.real()));
    double r = std::min({1.5, 0.45 * gap, 0.8 * muj});
    ContourRoots cr = zeros_in_circle(f, Complex(muj), r);
    for (Complex mu : cr.roots) {
      // Final polish in z = sqrt(mu).
      AnalyticFn fz = [&f](Complex w) { return f(w * w); };
      bool ok = false;
      Complex w = newton_polish(fz, sqrt_upper(mu), 1e-12, 50, &ok);
      roots.push_back(ok ? w * w : mu);
    }
  }
  return cluster_roots(std::move(roots), 1e-7);
}

GreenFunction::GreenFunction(const MetricGraph& graph, Complex mu, double eps,
                             GraphPoint source)
    : graph_(&graph), mu_(mu), z_(sqrt_upper(mu)), source_(source) {
  SecularSystem sys(graph, mu, eps);
  if (sys.at_resonance())
    throw numerical_error("green_function: mu is at or near an eigenvalue (|h| below floor)");
  coeff_ = sys.solve(sys.rhs_point_source(source));
  offset_.resize(graph.num_edges());
  for (int e = 0; e < graph.num_edges(); ++e) offset_[e] = sys.amp_offset(e);
}

Complex GreenFunction::eval(GraphPoint x) const {
  const EdgeRecord& e = graph_->edge(x.edge);
  Complex v = coeff_(offset_[x.edge]) * std::exp(kI * z_ * x.t);
  if (!e.infinite()) v += coeff_(offset_[x.edge] + 1) * std::exp(-kI * z_ * x.t);
  if (x.edge == source_.edge)
    v += std::exp(kI * z_ * std::abs(x.t - source_.t)) / (2.0 * kI * z_);
  return v;
}

GreenFunction green_function(const MetricGraph& graph, Complex mu, double eps,
                             GraphPoint source) {
  return GreenFunction(graph, mu, eps, source);
}

GraphScatteringSolution scattering_solution(const MetricGraph& graph, Complex mu,
                                            double eps, int incident_edge) {
  if (graph.num_infinite_edges() == 0)
    throw validation_error("scattering_solution: graph has no infinite edges");
  if (!graph.edge(incident_edge).infinite())
    throw validation_error("scattering_solution: incident edge must be infinite");
  SecularSystem sys(graph, mu, eps);
  if (sys.at_resonance())
    throw numerical_error("scattering_solution: resonance proximity (|h| below floor)");
  Vector x = sys.solve(sys.rhs_incident(incident_edge));
  GraphScatteringSolution sol;
  sol.incident_edge = incident_edge;
  sol.mu = mu;
  sol.outgoing.resize(graph.num_edges());
  sol.incoming.resize(graph.num_edges());
  std::vector<Complex> trans;
  for (int e = 0; e < graph.num_edges(); ++e) {
    sol.outgoing[e] = x(sys.amp_offset(e));
    if (graph.edge(e).infinite()) {
      sol.incoming[e] = e == incident_edge ? Complex(1.0) : Complex(0.0);
      trans.push_back(sol.outgoing[e]);
    } else {
      sol.incoming[e] = x(sys.amp_offset(e) + 1);
    }
  }
  sol.transmission_row = Eigen::Map<Vector>(trans.data(), trans.size());
  return sol;
}

Complex GraphScatteringSolution::eval(const MetricGraph& g, GraphPoint x) const {
  const EdgeRecord& e = g.edge(x.edge);
  Complex z = sqrt_upper(mu);
  Complex v = outgoing[x.edge] * std::exp(kI * z * x.t);
  if (e.infinite()) {
    if (x.edge == incident_edge) v += std::exp(-kI * z * x.t);
  } else {
    v += incoming[x.edge] * std::exp(-kI * z * x.t);
  }
  return v;
}

Matrix graph_scattering_matrix(const MetricGraph& graph, Complex mu, double eps) {
  std::vector<int> inf_edges;
  for (int e = 0; e < graph.num_edges(); ++e)
    if (graph.edge(e).infinite()) inf_edges.push_back(e);
  const int m = static_cast<int>(inf_edges.size());
  Matrix t(m, m);
  for (int p = 0; p < m; ++p) {
    GraphScatteringSolution sol = scattering_solution(graph, mu, eps, inf_edges[p]);
    for (int j = 0; j < m; ++j) t(p, j) = sol.transmission_row(j);
  }
  return t;
}

namespace {

// Composite Simpson weights on n+1 equispaced nodes (n >= 2 intervals);
// odd interval counts get a 3/8 tail.
std::vector<double> simpson_weights(int n, double h) {
  std::vector<double> w(n + 1, 0.0);
  if (n < 2) throw validation_error("resolvent_apply: need at least 2 intervals per edge");
  int even_part = (n % 2 == 0) ? n : n - 3;
  for (int i = 0; i + 2 <= even_part; i += 2) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  }
  if (n % 2 != 0) {
    int i0 = n - 3;
    w[i0] += 3.0 * h / 8.0;
    w[i0 + 1] += 9.0 * h / 8.0;
    w[i0 + 2] += 9.0 * h / 8.0;
    w[i0 + 3] += 3.0 * h / 8.0;
  }
  return w;
}

}  // namespace

GraphField resolvent_apply(const MetricGraph& graph, Complex mu, double eps,
                           const GraphField& f) {
  if (static_cast<int>(f.edges.size()) != graph.num_edges())
    throw validation_error("resolvent_apply: field must cover every edge");
  double fmax = 0.0;
  for (const auto& es : f.edges)
    if (es.values.size() > 0) fmax = std::max(fmax, es.values.cwiseAbs().maxCoeff());

  SecularSystem sys(graph, mu, eps);
  if (sys.at_resonance())
    throw numerical_error("resolvent_apply: resonance proximity (|h| below floor)");

  // Quadrature nodes with nonzero weight*f, then one linear solve with
  // all right-hand sides at once.
  struct Src {
    GraphPoint at;
    Complex weight;  // quadrature weight times f value
  };
  std::vector<Src> sources;
  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto& es = f.edges[e];
    if (es.values.size() == 0) continue;
    const int n = static_cast<int>(es.values.size()) - 1;
    if (n < 1) continue;
    const double support_tol = 1e-12 * std::max(1.0, fmax);
    if (std::abs(es.values(0)) > support_tol ||
        (!graph.edge(e).infinite() && std::abs(es.values(n)) > support_tol))
      throw validation_error("resolvent_apply: support touches a vertex on edge " +
                             std::to_string(e));
    std::vector<double> w = simpson_weights(n, es.h);
    for (int i = 0; i <= n; ++i) {
      Complex c = w[i] * es.values(i);
      if (std::abs(c) > 0.0) sources.push_back({{e, i * es.h}, c});
    }
  }

  Matrix rhs(sys.unknowns(), sources.size());
  for (size_t q = 0; q < sources.size(); ++q)
    rhs.col(q) = sys.rhs_point_source(sources[q].at);
  Eigen::PartialPivLU<Matrix> lu(sys.matrix());
  Matrix coeff = lu.solve(rhs);

  Complex z = sqrt_upper(mu);
  GraphField out;
  out.edges.resize(graph.num_edges());
  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto& es = f.edges[e];
    out.edges[e].h = es.h;
    out.edges[e].values = Vector::Zero(es.values.size());
    const bool inf = graph.edge(e).infinite();
    for (int i = 0; i < es.values.size(); ++i) {
      double t = i * es.h;
      Complex acc = 0.0;
      for (size_t q = 0; q < sources.size(); ++q) {
        Complex v = coeff(sys.amp_offset(e), q) * std::exp(kI * z * t);
        if (!inf) v += coeff(sys.amp_offset(e) + 1, q) * std::exp(-kI * z * t);
        if (sources[q].at.edge == e)
          v += std::exp(kI * z * std::abs(t - sources[q].at.t)) / (2.0 * kI * z);
        acc += sources[q].weight * v;
      }
      out.edges[e].values(i) = acc;
    }
  }
  return out;
}

BasisPsi basis_psi(const VertexCondition& cond, int p, Complex mu, double eps) {
  if (p < 0 || p >= cond.dim()) throw validation_error("basis_psi: bad incident index");
  Matrix amp = vertex_scattering_amplitudes(cond, mu, eps);
  BasisPsi psi;
  psi.p = p;
  psi.mu = mu;
  psi.amplitudes = amp.row(p).transpose();
  return psi;
}

Complex BasisPsi::eval(int edge, double t) const {
  Complex z = sqrt_upper(mu);
  Complex v = amplitudes(edge) * std::exp(kI * z * t);
  if (edge == p) v += std::exp(-kI * z * t);
  return v;
}

}  // namespace thinfiber
