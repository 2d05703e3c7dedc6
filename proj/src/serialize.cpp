#include "bforge/serialize.hpp"

#include <json.hpp>

namespace bforge {

namespace {

using json = nlohmann::ordered_json;

json parse(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorKind::Input, "malformed JSON");
  return j;
}

cd complex_from(const json& j) {
  if (j.is_number()) return cd(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return cd(j[0].get<double>(), j[1].get<double>());
  fail(ErrorKind::Input, "expected a number or an [re, im] pair");
}

json complex_to(cd z) { return json::array({z.real(), z.imag()}); }

json vec_to(const Vec& v) {
  json a = json::array();
  for (const auto& z : v) a.push_back(complex_to(z));
  return a;
}

Vec vec_from(const json& j) {
  if (!j.is_array()) fail(ErrorKind::Input, "expected an array of complex numbers");
  Vec v;
  for (const auto& e : j) v.push_back(complex_from(e));
  return v;
}

Matrix matrix_from(const json& j) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::Input, "expected a matrix as nested rows");
  const int n = static_cast<int>(j.size());
  Matrix m(n, static_cast<int>(j[0].size()));
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(j[i].size()) != m.cols)
      fail(ErrorKind::Input, "ragged matrix rows");
    for (int c = 0; c < m.cols; ++c) m(i, c) = complex_from(j[i][c]);
  }
  return m;
}

json matrix_to(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (int c = 0; c < m.cols; ++c) row.push_back(complex_to(m(i, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Operator operator_from_json(const std::string& text) {
  json j = parse(text);
  const std::string kind = j.value("kind", "");
  const int dim = j.value("dim", 0);
  if (kind == "shift") return make_shift(dim);
  if (kind == "weighted_shift") {
    if (!j.contains("weights")) fail(ErrorKind::Input, "weighted_shift: missing weights");
    Vec w = vec_from(j["weights"]);
    if (dim > 0 && static_cast<int>(w.size()) != dim - 1)
      fail(ErrorKind::Input, "weighted_shift: need dim-1 weights");
    return make_weighted_shift(w);
  }
  if (kind == "jordan") {
    cd lambda = j.contains("lambda") ? complex_from(j["lambda"]) : cd(0.0);
    return make_jordan(dim, lambda);
  }
  if (kind == "diagonal") {
    if (!j.contains("entries")) fail(ErrorKind::Input, "diagonal: missing entries");
    Vec e = vec_from(j["entries"]);
    if (dim > 0 && static_cast<int>(e.size()) != dim)
      fail(ErrorKind::Input, "diagonal: entries length must equal dim");
    return make_diagonal(e);
  }
  if (kind == "dense") {
    if (!j.contains("entries")) fail(ErrorKind::Input, "dense: missing entries");
    Matrix m = matrix_from(j["entries"]);
    if (m.rows != m.cols) fail(ErrorKind::Input, "dense: matrix must be square");
    if (dim > 0 && dim != m.rows) fail(ErrorKind::Input, "dense: dim mismatch");
    return make_dense(m);
  }
  fail(ErrorKind::Input, "unknown operator kind '" + kind + "'");
}

ConvexRegion region_from_json(const std::string& text) {
  json j = parse(text);
  const std::string shape = j.value("shape", "");
  if (shape == "disc") {
    if (!j.contains("center") || !j.contains("radius"))
      fail(ErrorKind::Input, "disc: need center and radius");
    std::vector<double> center;
    if (j["center"].is_number()) {
      center.push_back(j["center"].get<double>());
    } else {
      for (const auto& e : j["center"]) center.push_back(e.get<double>());
    }
    return disc_region(center, j["radius"].get<double>());
  }
  if (shape == "polygon") {
    std::vector<std::array<double, 2>> verts;
    for (const auto& v : j["vertices"])
      verts.push_back({v[0].get<double>(), v[1].get<double>()});
    return polygon_region(verts);
  }
  if (shape == "halfspaces") {
    std::vector<ConvexRegion::Halfspace> rows;
    for (const auto& r : j["rows"]) {
      ConvexRegion::Halfspace h;
      for (const auto& e : r["normal"]) h.normal.push_back(e.get<double>());
      h.offset = r["offset"].get<double>();
      rows.push_back(std::move(h));
    }
    return halfspace_region(rows);
  }
  fail(ErrorKind::Input, "unknown region shape '" + shape + "'");
}

std::vector<Vec> targets_from_json(const std::string& text, int tuple_len) {
  json j = parse(text);
  const json& list = j.is_object() && j.contains("points") ? j["points"] : j;
  if (!list.is_array()) fail(ErrorKind::Input, "targets: expected a list of points");
  std::vector<Vec> out;
  for (const auto& e : list) {
    Vec pt;
    if (tuple_len == 1) {
      pt.push_back(complex_from(e));
    } else {
      if (!e.is_array() || static_cast<int>(e.size()) != tuple_len)
        fail(ErrorKind::Input, "targets: tuple length mismatch");
      for (const auto& c : e) pt.push_back(complex_from(c));
    }
    out.push_back(std::move(pt));
  }
  return out;
}

std::vector<double> reals_from_json(const std::string& text) {
  json j = parse(text);
  const json& list = j.is_object() && j.contains("values") ? j["values"] : j;
  if (!list.is_array()) fail(ErrorKind::Input, "expected a list of reals");
  std::vector<double> out;
  for (const auto& e : list) {
    if (!e.is_number()) fail(ErrorKind::Input, "expected a list of reals");
    out.push_back(e.get<double>());
  }
  return out;
}

TailSequence sequence_from_json(const std::string& text) {
  json j = parse(text);
  TailSequence seq;
  if (j.is_array()) {
    seq.values = vec_from(j);
    return seq;
  }
  if (!j.contains("values")) fail(ErrorKind::Input, "sequence: missing values");
  seq.values = vec_from(j["values"]);
  if (j.contains("tail")) {
    seq.tail = complex_from(j["tail"]);
    seq.has_tail = true;
  }
  return seq;
}

namespace {

// A block is a scalar (number or [re, im]) or a matrix of rows. Rows of bare
// numbers are real entries; when that reading is not square but reading the
// innermost pairs as complex entries is, the pair reading wins.
Matrix block_from(const json& b) {
  if (b.is_number()) {
    Matrix m(1, 1);
    m(0, 0) = complex_from(b);
    return m;
  }
  if (!b.is_array() || b.empty()) fail(ErrorKind::Input, "blocks: malformed block");
  if (b[0].is_number()) {
    if (b.size() == 2) {
      Matrix m(1, 1);
      m(0, 0) = complex_from(b);
      return m;
    }
    fail(ErrorKind::Input, "blocks: a scalar block must be a number or an [re, im] pair");
  }
  const size_t rows = b.size();
  const bool scalar_rows = b[0].is_array() && !b[0].empty() && b[0][0].is_number();
  if (scalar_rows && b[0].size() != rows && b[0].size() == 2) {
    // e.g. [[re, im]]: one row of one pair
    json wrapped = json::array();
    for (const auto& row : b) {
      json r = json::array();
      r.push_back(row);
      wrapped.push_back(std::move(r));
    }
    if (wrapped.size() == 1 || wrapped.size() == wrapped[0].size())
      return matrix_from(wrapped);
  }
  return matrix_from(b);
}

}  // namespace

std::vector<Matrix> blocks_from_json(const std::string& text) {
  json j = parse(text);
  const json& list = j.is_object() && j.contains("blocks") ? j["blocks"] : j;
  if (!list.is_array() || list.empty())
    fail(ErrorKind::Input, "blocks: expected a non-empty list of matrices");
  std::vector<Matrix> out;
  for (const auto& b : list) out.push_back(block_from(b));
  return out;
}

std::string frame_to_json(const Frame& f) {
  json j;
  j["schema"] = kSchemaTag;
  j["dim"] = f.dim;
  j["tol_ortho"] = f.tol_ortho;
  json vecs = json::array();
  for (const auto& v : f.vectors) vecs.push_back(vec_to(v));
  j["vectors"] = std::move(vecs);
  return j.dump(2);
}

Frame frame_from_json(const std::string& text) {
  json j = parse(text);
  Frame f;
  f.dim = j.value("dim", 0);
  f.tol_ortho = j.value("tol_ortho", 1e-10);
  if (!j.contains("vectors")) fail(ErrorKind::Input, "frame: missing vectors");
  for (const auto& v : j["vectors"]) {
    Vec vec = vec_from(v);
    if (static_cast<int>(vec.size()) != f.dim)
      fail(ErrorKind::Input, "frame: vector length does not match dim");
    f.vectors.push_back(std::move(vec));
  }
  return f;
}

std::string certificate_to_json(const Certificate& c) {
  json j;
  j["schema"] = kSchemaTag;
  j["kind"] = c.kind;
  j["dim"] = c.dim;
  j["s"] = c.s;
  j["max_part_norm"] = c.max_part_norm;
  j["tol_attain"] = c.tol_attain;
  j["slack"] = c.slack;
  j["groups"] = c.groups;
  j["weights"] = c.weights;
  j["targets"] = c.targets;
  j["pivots"] = c.pivots;
  j["relations"] = c.relations;
  json steps = json::array();
  for (const auto& s : c.steps) {
    json e;
    e["k"] = s.k;
    e["group"] = s.group;
    e["t"] = s.t;
    e["rho"] = s.rho;
    e["delta"] = s.delta;
    e["mu"] = s.mu;
    e["residual"] = s.residual;
    e["weight_sum"] = s.weight_sum;
    e["ln_dist2"] = s.ln_dist2;
    e["step_decay"] = s.step_decay;
    e["c"] = s.c;
    e["degenerate"] = s.degenerate;
    e["saturated"] = s.saturated;
    steps.push_back(std::move(e));
  }
  j["steps"] = std::move(steps);
  json flags = json::object();
  for (const auto& [k, v] : c.flags) flags[k] = v;
  j["flags"] = std::move(flags);
  return j.dump(2);
}

Certificate certificate_from_json(const std::string& text) {
  json j = parse(text);
  Certificate c;
  c.kind = j.value("kind", "exact");
  c.dim = j.value("dim", 0);
  c.s = j.value("s", 0);
  c.max_part_norm = j.value("max_part_norm", 0.0);
  c.tol_attain = j.value("tol_attain", 1e-10);
  c.slack = j.value("slack", 1e-6);
  if (j.contains("groups")) c.groups = j["groups"].get<std::vector<std::vector<int>>>();
  if (j.contains("weights")) c.weights = j["weights"].get<std::vector<double>>();
  if (j.contains("targets"))
    c.targets = j["targets"].get<std::vector<std::vector<double>>>();
  if (j.contains("pivots")) c.pivots = j["pivots"].get<std::vector<int>>();
  if (j.contains("relations"))
    c.relations = j["relations"].get<std::vector<std::vector<double>>>();
  if (j.contains("steps")) {
    for (const auto& e : j["steps"]) {
      CertStep s;
      s.k = e.value("k", 0);
      s.group = e.value("group", 0);
      s.t = e.value("t", 0.0);
      s.rho = e.value("rho", 0.0);
      s.delta = e.value("delta", 0.0);
      if (e.contains("mu")) s.mu = e["mu"].get<std::vector<double>>();
      s.residual = e.value("residual", 0.0);
      s.weight_sum = e.value("weight_sum", 0.0);
      s.ln_dist2 = e.value("ln_dist2", 0.0);
      s.step_decay = e.value("step_decay", 0.0);
      s.c = e.value("c", 0.0);
      s.degenerate = e.value("degenerate", false);
      s.saturated = e.value("saturated", false);
      c.steps.push_back(std::move(s));
    }
  }
  if (j.contains("flags"))
    for (const auto& [k, v] : j["flags"].items()) c.flags[k] = v.get<std::string>();
  return c;
}

namespace {

void ledger_fill(const ConvexCombinationLedger& led, json& j) {
  j["n"] = led.n;
  j["c"] = led.c;
  j["d"] = led.d;
  j["c_prime"] = led.c_prime;
  j["d_prime"] = led.d_prime;
  j["eps_prime"] = led.eps_prime;
  j["eps"] = led.eps;
  j["margin"] = led.margin;
  j["weight_total"] = led.weight_total;
  j["reconstruction_residual"] = led.reconstruction_residual;
  json summands = json::array();
  for (const auto& s : led.summands) {
    json e;
    e["label"] = s.label;
    e["weight"] = s.weight;
    e["entry_bound"] = s.entry_bound;
    e["threshold"] = s.threshold;
    e["membership"] = s.membership;
    summands.push_back(std::move(e));
  }
  j["summands"] = std::move(summands);
}

}  // namespace

std::string ledger_to_json(const ConvexCombinationLedger& led) {
  json j;
  j["schema"] = kSchemaTag;
  ledger_fill(led, j);
  return j.dump(2);
}

std::string plan_to_json(const PinchingPlan& p,
                         const std::vector<ConvexCombinationLedger>* ledgers) {
  json j;
  j["schema"] = kSchemaTag;
  j["n"] = p.n;
  j["op_norm"] = p.op_norm;
  j["tol_pinch"] = p.tol_pinch;
  j["slack"] = p.slack;
  j["groups"] = p.groups;
  json blocks = json::array();
  for (const auto& b : p.blocks) {
    json e;
    e["c"] = matrix_to(b.c);
    e["c_norm"] = b.c_norm;
    e["rho"] = b.rho;
    e["taus"] = vec_to(b.taus);
    json cps = json::array();
    for (const auto& cp : b.cprimes) cps.push_back(matrix_to(cp));
    e["cprimes"] = std::move(cps);
    e["cprime_norm"] = b.cprime_norm;
    e["cprime_norm_bound"] = b.cprime_norm_bound;
    e["power_deviation"] = b.power_deviation;
    e["deviation_bound"] = b.deviation_bound;
    json vecs = json::array();
    for (const auto& v : b.k_basis.vectors) vecs.push_back(vec_to(v));
    e["k_basis"] = std::move(vecs);
    e["pinch_residual"] = b.pinch_residual;
    e["group"] = b.group;
    e["weight"] = b.weight;
    e["weight_sum"] = b.weight_sum;
    e["ln_dist2"] = b.ln_dist2;
    e["windows_used"] = b.windows_used;
    blocks.push_back(std::move(e));
  }
  j["blocks"] = std::move(blocks);
  if (ledgers) {
    json ls = json::array();
    for (const auto& led : *ledgers) {
      json lj;
      ledger_fill(led, lj);
      ls.push_back(std::move(lj));
    }
    j["ledgers"] = std::move(ls);
  }
  return j.dump(2);
}

PinchingPlan plan_from_json(const std::string& text) {
  json j = parse(text);
  PinchingPlan p;
  p.n = j.value("n", 1);
  p.op_norm = j.value("op_norm", 0.0);
  p.tol_pinch = j.value("tol_pinch", 1e-8);
  p.slack = j.value("slack", 1e-6);
  if (j.contains("groups")) p.groups = j["groups"].get<std::vector<std::vector<int>>>();
  if (!j.contains("blocks")) fail(ErrorKind::Input, "plan: missing blocks");
  for (const auto& e : j["blocks"]) {
    PinchBlock b;
    b.c = matrix_from(e["c"]);
    b.c_norm = e.value("c_norm", 0.0);
    b.rho = e.value("rho", 0.0);
    if (e.contains("taus")) b.taus = vec_from(e["taus"]);
    if (e.contains("cprimes"))
      for (const auto& cp : e["cprimes"]) b.cprimes.push_back(matrix_from(cp));
    b.cprime_norm = e.value("cprime_norm", 0.0);
    b.cprime_norm_bound = e.value("cprime_norm_bound", 1.0);
    if (e.contains("power_deviation"))
      b.power_deviation = e["power_deviation"].get<std::vector<double>>();
    if (e.contains("deviation_bound"))
      b.deviation_bound = e["deviation_bound"].get<std::vector<double>>();
    if (e.contains("k_basis")) {
      for (const auto& v : e["k_basis"]) b.k_basis.vectors.push_back(vec_from(v));
      if (!b.k_basis.vectors.empty())
        b.k_basis.dim = static_cast<int>(b.k_basis.vectors[0].size());
    }
    b.pinch_residual = e.value("pinch_residual", 0.0);
    b.group = e.value("group", 0);
    b.weight = e.value("weight", 0.0);
    b.weight_sum = e.value("weight_sum", 0.0);
    b.ln_dist2 = e.value("ln_dist2", 0.0);
    if (e.contains("windows_used"))
      b.windows_used = e["windows_used"].get<std::vector<int>>();
    p.blocks.push_back(std::move(b));
  }
  return p;
}

std::string moment_to_json(const MomentDecomposition& d) {
  json j;
  j["schema"] = kSchemaTag;
  j["rho"] = d.rho;
  j["n"] = d.n;
  j["eps"] = vec_to(d.eps);
  j["points"] = vec_to(d.points);
  j["weights"] = d.weights;
  j["weight_sum"] = d.weight_sum();
  j["b_bound"] = b_bound(d.n, d.rho);
  j["reconstruction_residual"] = moment_reconstruction_residual(d);
  return j.dump(2);
}

std::string boundary_to_csv(const std::vector<BoundarySample>& samples) {
  std::string out = "theta,value,re,im\n";
  char buf[160];
  for (const auto& s : samples) {
    snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", s.theta, s.value,
             s.vertex.real(), s.vertex.imag());
    out += buf;
  }
  return out;
}

}  // namespace bforge
