#include "bforge.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <json.hpp>

#include "bforge/serialize.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace bforge;

thread_local std::string g_last_error;

bforge_status status_of(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Input:
      return BFORGE_INPUT;
    case ErrorKind::NotAttained:
    case ErrorKind::UnsupportedBlock:
    case ErrorKind::Internal:
      return BFORGE_NUMERIC;
    default:
      return BFORGE_VERDICT;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename F>
bforge_status guarded(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    g_last_error = std::string(error_kind_name(e.kind())) + ": " + e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = std::string("error: ") + e.what();
    return BFORGE_INPUT;
  }
}

struct BuildKnobs {
  int steps = 0;
  uint64_t seed = 0;
  int groups = 1;
  double margin = 0.0;
  int samples = 720;
  double tol = -1.0;
  double tol_pinch = 1e-8;
  int window = 0;
};

BuildKnobs knobs_from(const char* options_json) {
  BuildKnobs k;
  if (options_json == nullptr || *options_json == '\0') return k;
  json j = json::parse(options_json, nullptr, false);
  if (j.is_discarded()) fail(ErrorKind::Input, "options: malformed JSON");
  k.steps = j.value("steps", 0);
  k.seed = j.value("seed", 0ull);
  k.groups = j.value("groups", 1);
  k.margin = j.value("margin", 0.0);
  k.samples = j.value("samples", 720);
  k.tol = j.value("tol", -1.0);
  k.tol_pinch = j.value("tol_pinch", 1e-8);
  k.window = j.value("window", 0);
  return k;
}

BuildOptions build_options(const BuildKnobs& k) {
  BuildOptions o;
  o.m_groups = k.groups;
  o.seed = k.seed;
  o.tol_attain = k.tol;
  return o;
}

// verify needs the tuple the certificate was built on: rebuild it from the
// operator, the certificate kind, and the reduction pivots.
SelfAdjointTuple tuple_for_cert(const Operator& op, const Certificate& cert) {
  OperatorTuple t;
  if (cert.kind == "power") {
    const int n = cert.flags.count("n") ? std::stoi(cert.flags.at("n")) : 1;
    t = power_tuple(op, n);
  } else {
    t = single(op);
  }
  SelfAdjointTuple s = hermitian_parts(t);
  if (cert.pivots.empty()) return s;
  std::vector<bool> dropped(s.s, false);
  for (int p : cert.pivots)
    if (p >= 0 && p < s.s) dropped[p] = true;
  SelfAdjointTuple red;
  red.dim = s.dim;
  for (int j = 0; j < s.s; ++j)
    if (!dropped[j]) red.parts.push_back(s.parts[j]);
  red.s = static_cast<int>(red.parts.size());
  return red;
}

}  // namespace

extern "C" {

struct bforge_operator {
  Operator op;
};

const char* bforge_last_error(void) { return g_last_error.c_str(); }

void bforge_string_free(char* s) { std::free(s); }

bforge_status bforge_operator_load(const char* spec_json, bforge_operator** out) {
  return guarded([&]() {
    if (spec_json == nullptr || out == nullptr)
      fail(ErrorKind::Input, "operator_load: null argument");
    auto* h = new bforge_operator{operator_from_json(spec_json)};
    *out = h;
    return BFORGE_OK;
  });
}

void bforge_operator_free(bforge_operator* op) { delete op; }

int bforge_operator_dim(const bforge_operator* op) { return op ? op->op.dim : 0; }

int bforge_operator_bandwidth(const bforge_operator* op) {
  return op ? op->op.bandwidth : -1;
}

bforge_status bforge_numrange_boundary(const bforge_operator* op, int samples,
                                       char** csv_out) {
  return guarded([&]() {
    if (!op || !csv_out) fail(ErrorKind::Input, "numrange_boundary: null argument");
    *csv_out = dup_string(boundary_to_csv(numrange_boundary(op->op, samples)));
    return BFORGE_OK;
  });
}

bforge_status bforge_we_model(const bforge_operator* op, const char* region_json,
                              double margin, int samples, char** region_out) {
  return guarded([&]() {
    if (!op || !region_json) fail(ErrorKind::Input, "we_model: null argument");
    ConvexRegion r = we_model(region_from_json(region_json), op->op, margin, samples);
    json j;
    j["schema"] = kSchemaTag;
    j["validated"] = r.validated;
    j["margin"] = r.margin;
    j["region"] = json::parse(region_json);
    if (region_out) *region_out = dup_string(j.dump(2));
    return BFORGE_OK;
  });
}

bforge_status bforge_moment_decompose(const char* eps_json, double rho,
                                      char** json_out) {
  return guarded([&]() {
    if (!eps_json || !json_out) fail(ErrorKind::Input, "moment: null argument");
    std::vector<Vec> pts = targets_from_json(eps_json, 1);
    Vec eps;
    for (const auto& p : pts) eps.push_back(p[0]);
    MomentDecomposition d = circle_moment_decompose(eps, rho);
    *json_out = dup_string(moment_to_json(d));
    return BFORGE_OK;
  });
}

bforge_status bforge_build_diagonal(const bforge_operator* op,
                                    const char* region_json,
                                    const char* targets_json,
                                    const char* options_json, char** frame_out,
                                    char** cert_out) {
  return guarded([&]() {
    if (!op || !region_json || !targets_json)
      fail(ErrorKind::Input, "build_diagonal: null argument");
    const BuildKnobs k = knobs_from(options_json);
    ConvexRegion region = region_from_json(region_json);
    if (k.margin > 0.0) region = we_model(region, op->op, k.margin, k.samples);
    std::vector<Vec> targets = targets_from_json(targets_json, 1);
    const int steps = k.steps > 0 ? k.steps : static_cast<int>(targets.size());
    BuildResult res =
        build_exact_diagonal_complex(single(op->op), &region, targets, {},
                                     standard_dense_sequence(op->op.dim), steps,
                                     build_options(k));
    if (frame_out) *frame_out = dup_string(frame_to_json(res.frame));
    if (cert_out) *cert_out = dup_string(certificate_to_json(res.cert));
    return BFORGE_OK;
  });
}

bforge_status bforge_build_approx(const bforge_operator* op,
                                  const char* targets_json,
                                  const char* alphas_json,
                                  const char* region_json,
                                  const char* options_json, char** frame_out,
                                  char** cert_out) {
  return guarded([&]() {
    if (!op || !targets_json || !alphas_json)
      fail(ErrorKind::Input, "build_approx: null argument");
    const BuildKnobs k = knobs_from(options_json);
    std::vector<Vec> targets = targets_from_json(targets_json, 1);
    std::vector<double> alphas = reals_from_json(alphas_json);
    ConvexRegion region;
    const ConvexRegion* rp = nullptr;
    if (region_json && *region_json) {
      region = region_from_json(region_json);
      if (k.margin > 0.0) region = we_model(region, op->op, k.margin, k.samples);
      rp = &region;
    }
    const int steps = k.steps > 0 ? k.steps : static_cast<int>(targets.size());
    BuildResult res =
        build_approx_diagonal(single(op->op), targets, alphas, rp,
                              standard_dense_sequence(op->op.dim), steps,
                              build_options(k));
    if (frame_out) *frame_out = dup_string(frame_to_json(res.frame));
    if (cert_out) *cert_out = dup_string(certificate_to_json(res.cert));
    return BFORGE_OK;
  });
}

bforge_status bforge_build_power(const bforge_operator* op,
                                 const char* targets_json, int n,
                                 const char* rho_model_json,
                                 const char* options_json, char** frame_out,
                                 char** cert_out) {
  return guarded([&]() {
    if (!op || !targets_json || !rho_model_json)
      fail(ErrorKind::Input, "build_power: null argument");
    const BuildKnobs k = knobs_from(options_json);
    std::vector<Vec> pts = targets_from_json(targets_json, 1);
    Vec lambdas;
    for (const auto& p : pts) lambdas.push_back(p[0]);
    ConvexRegion model = region_from_json(rho_model_json);
    const int steps = k.steps > 0 ? k.steps : static_cast<int>(lambdas.size());
    BuildResult res = build_power_diagonal(op->op, lambdas, n, model,
                                           standard_dense_sequence(op->op.dim),
                                           steps, build_options(k));
    if (frame_out) *frame_out = dup_string(frame_to_json(res.frame));
    if (cert_out) *cert_out = dup_string(certificate_to_json(res.cert));
    return BFORGE_OK;
  });
}

bforge_status bforge_build_schatten(const bforge_operator* op,
                                    const char* targets_json, double p,
                                    const char* region_json,
                                    const char* options_json, char** frame_out,
                                    char** cert_out, char** report_out) {
  return guarded([&]() {
    if (!op || !targets_json || !region_json)
      fail(ErrorKind::Input, "build_schatten: null argument");
    const BuildKnobs k = knobs_from(options_json);
    std::vector<Vec> targets = targets_from_json(targets_json, 1);
    ConvexRegion region = region_from_json(region_json);
    if (k.margin > 0.0) region = we_model(region, op->op, k.margin, k.samples);
    const int steps = k.steps > 0 ? k.steps : static_cast<int>(targets.size());
    SchattenResult res =
        build_schatten_perturbation(single(op->op), targets, p, region,
                                    standard_dense_sequence(op->op.dim), steps,
                                    build_options(k));
    if (frame_out) *frame_out = dup_string(frame_to_json(res.frame));
    if (cert_out) *cert_out = dup_string(certificate_to_json(res.cert));
    if (report_out) {
      json j;
      j["schema"] = kSchemaTag;
      j["p"] = p;
      json kaps = json::array();
      for (const auto& kap : res.report.kappas) {
        json row = json::array();
        for (const auto& z : kap) row.push_back(json::array({z.real(), z.imag()}));
        kaps.push_back(std::move(row));
      }
      j["kappas"] = std::move(kaps);
      j["kappa_partial_sums"] = res.report.kappa_partial;
      j["bound_partial_sums"] = res.report.bound_partial;
      *report_out = dup_string(j.dump(2));
    }
    return BFORGE_OK;
  });
}

bforge_status bforge_pinch(const bforge_operator* op, const char* blocks_json,
                           const char* options_json, char** plan_out) {
  return guarded([&]() {
    if (!op || !blocks_json) fail(ErrorKind::Input, "pinch: null argument");
    const BuildKnobs k = knobs_from(options_json);
    PinchOptions po;
    po.tol_pinch = k.tol_pinch;
    po.m_groups = k.groups;
    po.seed = k.seed;
    po.window = k.window;
    PinchingPlan plan = pinch_blaschke(op->op, blocks_from_json(blocks_json),
                                       standard_dense_sequence(op->op.dim), po);
    if (plan_out) *plan_out = dup_string(plan_to_json(plan));
    return BFORGE_OK;
  });
}

bforge_status bforge_pinch_power(const bforge_operator* op,
                                 const char* blocks_json, int n,
                                 const char* options_json, char** plan_out) {
  return guarded([&]() {
    if (!op || !blocks_json) fail(ErrorKind::Input, "pinch_power: null argument");
    const BuildKnobs k = knobs_from(options_json);
    PinchOptions po;
    po.tol_pinch = k.tol_pinch;
    po.m_groups = k.groups;
    po.seed = k.seed;
    po.window = k.window;
    PowerPinchResult res =
        pinch_power_blaschke(op->op, blocks_from_json(blocks_json), n,
                             standard_dense_sequence(op->op.dim), po);
    if (plan_out) *plan_out = dup_string(plan_to_json(res.plan, &res.ledgers));
    return BFORGE_OK;
  });
}

bforge_status bforge_check(const char* kind, const char* payload_json,
                           char** verdict_out) {
  return guarded([&]() {
    if (!kind || !payload_json) fail(ErrorKind::Input, "check: null argument");
    json payload = json::parse(payload_json, nullptr, false);
    if (payload.is_discarded()) fail(ErrorKind::Input, "check: malformed JSON");
    const std::string k = kind;
    json out;
    out["schema"] = kSchemaTag;
    out["kind"] = k;
    bool negative = false;

    if (k == "blaschke") {
      ConvexRegion region = region_from_json(payload.at("region").dump());
      std::vector<std::vector<double>> pts;
      for (const auto& e : payload.at("points")) {
        if (e.is_array() && e.size() == 2) {
          pts.push_back({e[0].get<double>(), e[1].get<double>()});
        } else {
          pts.push_back({e.get<double>(), 0.0});
        }
      }
      BlaschkeReport rep = blaschke_report(pts, region, payload.value("exponent", 1));
      out["verdict"] = trend_name(rep.trend);
      out["partial_sums"] = rep.partial_sums;
      negative = rep.trend == Trend::Summable;
    } else if (k == "positive") {
      Operator t = operator_from_json(payload.at("op").dump());
      std::vector<double> vals;
      for (const auto& e : payload.at("values")) vals.push_back(e.get<double>());
      Verdict v = positive_necessary(t, vals);
      out["verdict"] = v.verdict;
      out["sum"] = v.lhs;
      out["flags"] = v.flags;
      negative = v.verdict == "infeasible";
    } else if (k == "functional") {
      Operator t = operator_from_json(payload.at("op").dump());
      SelfAdjointTuple s = hermitian_parts(single(t));
      std::vector<double> alphas;
      for (const auto& e : payload.at("alphas")) alphas.push_back(e.get<double>());
      std::vector<std::vector<double>> pts;
      for (const auto& e : payload.at("points"))
        pts.push_back({e[0].get<double>(), e[1].get<double>()});
      Verdict v = functional_necessary(s, pts, alphas);
      out["verdict"] = v.verdict;
      out["shifted_sum"] = v.lhs;
      out["min_spectrum"] = v.rhs;
      out["flags"] = v.flags;
      negative = v.verdict == "infeasible";
    } else if (k == "shift") {
      Vec lam;
      for (const auto& e : payload.at("points")) {
        if (e.is_array())
          lam.push_back(cd(e[0].get<double>(), e[1].get<double>()));
        else
          lam.push_back(cd(e.get<double>(), 0.0));
      }
      Verdict v = shift_characterization(lam);
      out["verdict"] = v.verdict;
      out["divergence_sum"] = v.lhs;
      out["flags"] = v.flags;
      negative = v.verdict == "not-diagonal";
    } else if (k == "unitary") {
      TailSequence seq = sequence_from_json(payload.dump());
      const bool ok = unitary_diag_condition(seq);
      out["verdict"] = ok ? "admissible" : "inadmissible";
      negative = !ok;
    } else if (k == "kadison") {
      TailSequence seq = sequence_from_json(payload.dump());
      KadisonVerdict v = kadison_condition(seq);
      out["verdict"] = v.verdict;
      out["a"] = v.a_infinite ? json("infinite") : json(v.a);
      out["b"] = v.b_infinite ? json("infinite") : json(v.b);
      negative = v.verdict == "inadmissible";
    } else {
      fail(ErrorKind::Input, "check: unknown kind '" + k + "'");
    }

    if (verdict_out) *verdict_out = dup_string(out.dump(2));
    return negative ? BFORGE_VERDICT : BFORGE_OK;
  });
}

bforge_status bforge_verify(const bforge_operator* op, const char* frame_json,
                            const char* cert_json, char** report_out) {
  return guarded([&]() {
    if (!op || !frame_json || !cert_json)
      fail(ErrorKind::Input, "verify: null argument");
    Frame frame = frame_from_json(frame_json);
    Certificate cert = certificate_from_json(cert_json);
    SelfAdjointTuple s = tuple_for_cert(op->op, cert);
    VerifyReport rep =
        verify_certificate(cert, frame, s, standard_dense_sequence(op->op.dim));
    json j;
    j["schema"] = kSchemaTag;
    j["ok"] = rep.ok;
    j["failing_step"] = rep.failing_step;
    j["reason"] = rep.reason;
    if (report_out) *report_out = dup_string(j.dump(2));
    return rep.ok ? BFORGE_OK : BFORGE_VERDICT;
  });
}

bforge_status bforge_verify_plan(const bforge_operator* op,
                                 const char* plan_json, char** report_out) {
  return guarded([&]() {
    if (!op || !plan_json) fail(ErrorKind::Input, "verify_plan: null argument");
    PinchingPlan plan = plan_from_json(plan_json);
    VerifyReport rep =
        verify_pinching_plan(plan, op->op, standard_dense_sequence(op->op.dim));
    json j;
    j["schema"] = kSchemaTag;
    j["ok"] = rep.ok;
    j["failing_step"] = rep.failing_step;
    j["reason"] = rep.reason;
    if (report_out) *report_out = dup_string(j.dump(2));
    return rep.ok ? BFORGE_OK : BFORGE_VERDICT;
  });
}

}  // extern "C"
