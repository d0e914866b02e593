#include "thinfiber/graph.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace thinfiber {

using nlohmann::json;

int MetricGraph::num_infinite_edges() const {
  int n = 0;
  for (const auto& e : edges_)
    if (e.infinite()) ++n;
  return n;
}

double MetricGraph::total_finite_length() const {
  double l = 0.0;
  for (const auto& e : edges_)
    if (!e.infinite()) l += e.length;
  return l;
}

MetricGraph MetricGraph::build(std::vector<EdgeRecord> edges,
                               std::vector<VertexCondition> conditions) {
  MetricGraph g;
  const int nv = static_cast<int>(conditions.size());
  g.vertices_.resize(nv);
  for (int v = 0; v < nv; ++v) g.vertices_[v].id = v;

  for (size_t ei = 0; ei < edges.size(); ++ei) {
    const EdgeRecord& e = edges[ei];
    if (e.a < 0 || e.a >= nv) {
      std::ostringstream os;
      os << "edge " << ei << ": dangling endpoint id " << e.a;
      throw validation_error(os.str());
    }
    if (e.infinite()) {
      if (e.b >= 0)
        throw validation_error("infinite edge cannot have two finite endpoints");
    } else {
      if (!(e.length > 0.0))
        throw validation_error("finite edge must have positive length");
      if (e.b < 0 || e.b >= nv) {
        std::ostringstream os;
        os << "edge " << ei << ": dangling endpoint id " << e.b;
        throw validation_error(os.str());
      }
    }
    g.vertices_[e.a].adjacency.push_back({static_cast<int>(ei), EdgeEnd::start});
    if (!e.infinite())
      g.vertices_[e.b].adjacency.push_back({static_cast<int>(ei), EdgeEnd::finish});
  }
  g.edges_ = std::move(edges);

  for (int v = 0; v < nv; ++v) {
    VertexRecord& rec = g.vertices_[v];
    rec.condition = conditions[v];
    if (rec.degree() < 1) {
      std::ostringstream os;
      os << "vertex " << v << " has no adjacent edges";
      throw validation_error(os.str());
    }
    if (rec.is_v1() && !rec.condition.valid_at_v1()) {
      std::ostringstream os;
      os << "vertex " << v << " has degree 1 and must carry Dirichlet or Neumann, got "
         << rec.condition.kind_name();
      throw validation_error(os.str());
    }
    if (rec.condition.dim() != rec.degree()) {
      // Degree-1 Dirichlet/Neumann are dimensionless in practice; fix up.
      if (rec.is_v1() && rec.condition.valid_at_v1()) {
        rec.condition = rec.condition.kind() == VertexCondition::Kind::dirichlet
                            ? VertexCondition::dirichlet(1)
                            : VertexCondition::neumann(1);
      } else {
        std::ostringstream os;
        os << "vertex " << v << ": condition dimension " << rec.condition.dim()
           << " != degree " << rec.degree();
        throw validation_error(os.str());
      }
    }
  }
  return g;
}

MetricGraph star_graph(int d, const std::vector<double>& lengths,
                       VertexCondition center, VertexCondition outer) {
  if (d < 2) throw validation_error("star_graph: d must be >= 2");
  if (static_cast<int>(lengths.size()) != d)
    throw validation_error("star_graph: need one length per edge");
  std::vector<EdgeRecord> edges;
  std::vector<VertexCondition> conds;
  conds.push_back(center);
  for (int j = 0; j < d; ++j) {
    EdgeRecord e;
    e.a = 0;
    e.length = lengths[j];
    if (e.infinite()) {
      e.b = -1;
    } else {
      e.b = static_cast<int>(conds.size());
      conds.push_back(outer);
    }
    edges.push_back(e);
  }
  return MetricGraph::build(std::move(edges), std::move(conds));
}

MetricGraph interval_graph(double l, VertexCondition left, VertexCondition right) {
  std::vector<EdgeRecord> edges{{0, 1, l}};
  return MetricGraph::build(std::move(edges), {left, right});
}

namespace {

Matrix parse_matrix(const json& arr) {
  // Row-major array of [re, im] pairs: [[[re,im],...],...].
  const int d = static_cast<int>(arr.size());
  Matrix t(d, d);
  for (int i = 0; i < d; ++i) {
    if (static_cast<int>(arr[i].size()) != d)
      throw validation_error("scattering matrix must be square");
    for (int j = 0; j < d; ++j)
      t(i, j) = Complex(arr[i][j][0].get<double>(), arr[i][j][1].get<double>());
  }
  return t;
}

json matrix_to_json(const Matrix& t) {
  json arr = json::array();
  for (int i = 0; i < t.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < t.cols(); ++j)
      row.push_back(json::array({t(i, j).real(), t(i, j).imag()}));
    arr.push_back(row);
  }
  return arr;
}

VertexCondition parse_condition(const json& jc) {
  const std::string type = jc.at("type").get<std::string>();
  if (type == "dirichlet") return VertexCondition::dirichlet();
  if (type == "neumann") return VertexCondition::neumann();
  if (type == "kirchhoff") return VertexCondition::kirchhoff(jc.at("dim").get<int>());
  if (type == "generalized_kirchhoff") {
    const auto& rv = jc.at("rho");
    RealVector rho(rv.size());
    for (size_t i = 0; i < rv.size(); ++i) rho(static_cast<int>(i)) = rv[i].get<double>();
    return VertexCondition::generalized_kirchhoff(rho);
  }
  if (type == "projection_dn") {
    const auto& pv = jc.at("p");
    const int d = static_cast<int>(pv.size());
    RealMatrix p(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) p(i, j) = pv[i][j].get<double>();
    // Validate and canonicalize through the eigendecomposition.
    ProjectionPair pp = threshold_projection(
        Matrix((RealMatrix::Identity(d, d) - 2.0 * p).cast<Complex>()), 1e-8);
    return VertexCondition::projection_dn(pp);
  }
  if (type == "scattering_gc") {
    double lambda0 = jc.value("lambda0", 0.0);
    if (jc.contains("matrix")) {
      Matrix t = parse_matrix(jc.at("matrix"));
      auto rep = check_unitary_symmetric(t, 1e-8);
      if (!rep.pass)
        throw validation_error("scattering_gc matrix is not unitary symmetric on load");
      double lambda1 = jc.value("lambda1", kInfiniteLength);
      return VertexCondition::scattering_gc(ScatteringMatrixFn::constant(t, lambda0, lambda1));
    }
    if (jc.contains("table")) {
      const auto& tab = jc.at("table");
      std::vector<double> lambdas = tab.at("lambda").get<std::vector<double>>();
      std::vector<Matrix> ts;
      for (const auto& m : tab.at("T")) {
        Matrix t = parse_matrix(m);
        auto rep = check_unitary_symmetric(t, 1e-6);
        if (!rep.pass)
          throw validation_error("scattering_gc table entry is not unitary symmetric");
        ts.push_back(t);
      }
      return VertexCondition::scattering_gc(ScatteringMatrixFn::table(lambdas, ts, lambda0));
    }
    throw validation_error("scattering_gc needs 'matrix' or 'table'");
  }
  throw validation_error("unknown condition type: " + type);
}

double parse_length(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInfiniteLength;
    throw validation_error("edge length string must be \"inf\"");
  }
  return j.get<double>();
}

}  // namespace

MetricGraph parse_graph_json(const std::string& text) {
  json doc = json::parse(text);
  if (doc.value("thinfiber_schema", 0) != 1)
    throw validation_error("graph file: missing or unsupported thinfiber_schema");
  std::vector<EdgeRecord> edges;
  for (const auto& je : doc.at("edges")) {
    EdgeRecord e;
    e.a = je.at("a").get<int>();
    e.length = parse_length(je.at("length"));
    if (e.infinite()) {
      if (je.contains("b") && !je.at("b").is_string())
        throw validation_error("infinite edge cannot have a finite endpoint b");
      e.b = -1;
    } else {
      e.b = je.at("b").get<int>();
    }
    edges.push_back(e);
  }
  const auto& jverts = doc.at("vertices");
  std::vector<VertexCondition> conds(jverts.size());
  const auto& jconds = doc.at("conditions");
  for (const auto& jv : jverts) {
    int id = jv.at("id").get<int>();
    if (id < 0 || id >= static_cast<int>(conds.size()))
      throw validation_error("vertex ids must be 0..n-1");
    std::string key = std::to_string(id);
    if (!jconds.contains(key))
      throw validation_error("no condition for vertex " + key);
    conds[id] = parse_condition(jconds.at(key));
  }
  return MetricGraph::build(std::move(edges), std::move(conds));
}

MetricGraph load_graph_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open graph file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_graph_json(ss.str());
}

std::string graph_to_json(const MetricGraph& g) {
  json doc;
  doc["thinfiber_schema"] = 1;
  json jverts = json::array();
  json jconds = json::object();
  for (const auto& v : g.vertices()) {
    jverts.push_back({{"id", v.id}});
    json jc;
    switch (v.condition.kind()) {
      case VertexCondition::Kind::dirichlet: jc["type"] = "dirichlet"; break;
      case VertexCondition::Kind::neumann: jc["type"] = "neumann"; break;
      case VertexCondition::Kind::kirchhoff:
        jc["type"] = "kirchhoff";
        jc["dim"] = v.condition.dim();
        break;
      case VertexCondition::Kind::generalized_kirchhoff: {
        jc["type"] = "generalized_kirchhoff";
        json rho = json::array();
        for (int i = 0; i < v.condition.dim(); ++i) rho.push_back(v.condition.rho()(i));
        jc["rho"] = rho;
        break;
      }
      case VertexCondition::Kind::projection_dn: {
        jc["type"] = "projection_dn";
        const RealMatrix& p = v.condition.projection().projection;
        json arr = json::array();
        for (int i = 0; i < p.rows(); ++i) {
          json row = json::array();
          for (int j = 0; j < p.cols(); ++j) row.push_back(p(i, j));
          arr.push_back(row);
        }
        jc["p"] = arr;
        break;
      }
      case VertexCondition::Kind::scattering_gc: {
        jc["type"] = "scattering_gc";
        jc["lambda0"] = v.condition.matrix_fn().lambda0;
        if (std::isfinite(v.condition.matrix_fn().lambda1))
          jc["lambda1"] = v.condition.matrix_fn().lambda1;
        jc["matrix"] =
            matrix_to_json(v.condition.matrix_fn().eval(Complex(v.condition.matrix_fn().lambda0)));
        break;
      }
    }
    jconds[std::to_string(v.id)] = jc;
  }
  json jedges = json::array();
  for (const auto& e : g.edges()) {
    json je;
    je["a"] = e.a;
    if (e.infinite()) {
      je["length"] = "inf";
    } else {
      je["b"] = e.b;
      je["length"] = e.length;
    }
    jedges.push_back(je);
  }
  doc["vertices"] = jverts;
  doc["edges"] = jedges;
  doc["conditions"] = jconds;
  return doc.dump(2);
}

}  // namespace thinfiber
