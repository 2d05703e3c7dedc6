// blaschke-forge command line: constructive diagonals and pinchings of
// finite operator truncations, with machine-checkable certificates.
//
// Every subcommand reads JSON specs (inline or from a file), drives the
// shared library through its C interface, writes the JSON/CSV artifacts, and
// prints a one-line summary. Exit codes: 0 success, 1 negative verdict or
// failed precondition, 2 numeric failure (attainment or realization budget),
// 3 malformed input.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bforge.h"

namespace {

using json = nlohmann::ordered_json;

struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { bforge_string_free(s); }
};

struct OwnedOp {
  bforge_operator* op = nullptr;
  ~OwnedOp() { bforge_operator_free(op); }
};

// JSON arguments are inline when they look like JSON, otherwise file paths.
std::string load_arg(const std::string& arg) {
  if (arg.empty()) return arg;
  const char c = arg.front();
  if (c == '{' || c == '[' || (c >= '0' && c <= '9') || c == '-') return arg;
  std::ifstream in(arg);
  if (!in) {
    std::cerr << "error: cannot read file '" << arg << "'\n";
    std::exit(3);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write file '" << path << "'\n";
    std::exit(3);
  }
  out << content;
}

int finish(bforge_status st, const std::string& summary) {
  if (st == BFORGE_OK || st == BFORGE_VERDICT) {
    std::cout << summary << "\n";
  } else {
    std::cerr << "error: " << bforge_last_error() << "\n";
  }
  return static_cast<int>(st);
}

bforge_operator* load_op_or_die(const std::string& arg) {
  bforge_operator* op = nullptr;
  if (bforge_operator_load(load_arg(arg).c_str(), &op) != BFORGE_OK) {
    std::cerr << "error: " << bforge_last_error() << "\n";
    std::exit(3);
  }
  return op;
}

std::string options_json(int steps, uint64_t seed, int groups, double margin,
                         int samples, double tol, double tol_pinch, int window) {
  json j;
  j["steps"] = steps;
  j["seed"] = seed;
  j["groups"] = groups;
  j["margin"] = margin;
  j["samples"] = samples;
  j["tol"] = tol;
  j["tol_pinch"] = tol_pinch;
  j["window"] = window;
  return j.dump();
}

std::string cert_summary(const char* cert_json) {
  json c = json::parse(cert_json, nullptr, false);
  if (c.is_discarded()) return "";
  double worst = 0.0;
  for (const auto& s : c.value("steps", json::array()))
    worst = std::max(worst, s.value("residual", 0.0));
  std::ostringstream os;
  os << c.value("steps", json::array()).size() << " steps, max residual " << worst;
  if (c.contains("flags") && c["flags"].contains("saturated_steps"))
    os << ", saturated steps " << c["flags"]["saturated_steps"].get<std::string>();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blaschke-forge: constructive diagonals and pinchings with certificates"};
  app.require_subcommand(1);

  std::string op_arg, region_arg, targets_arg, alphas_arg, blocks_arg, seq_arg;
  std::string out_path = "out.json", cert_path = "cert.json", report_path,
              frame_arg, cert_arg, plan_arg, kind;
  int steps = 0, samples = 720, groups = 1, n = 1, window = 0, exponent = 1;
  double rho = 1.0, margin = 0.0, tol = -1.0, tol_pinch = 1e-8, p_exp = 2.0;
  uint64_t seed = 0;

  auto* cmd_numrange = app.add_subcommand("numrange", "trace the numerical range boundary");
  cmd_numrange->add_option("--op", op_arg, "operator spec (JSON or file)")->required();
  cmd_numrange->add_option("--samples", samples, "boundary directions (default 720)");
  cmd_numrange->add_option("--out", out_path, "output CSV path")->required();

  auto* cmd_moment = app.add_subcommand("moment", "circular moment decomposition");
  cmd_moment->add_option("--eps", targets_arg, "target moments (JSON list or file)")->required();
  cmd_moment->add_option("--rho", rho, "circle radius")->required();
  cmd_moment->add_option("--n", n, "expected length (validated when given)");
  cmd_moment->add_option("--out", out_path, "output JSON path");

  auto add_build_common = [&](CLI::App* c) {
    c->add_option("--op", op_arg, "operator spec")->required();
    c->add_option("--targets", targets_arg, "target points")->required();
    c->add_option("--steps", steps, "number of steps (default: all targets)");
    c->add_option("--out", out_path, "frame output path");
    c->add_option("--cert", cert_path, "certificate output path");
    c->add_option("--seed", seed, "deterministic seed (default 0)");
    c->add_option("--groups", groups, "dense-sequence groups (default 1)");
    c->add_option("--tol", tol, "attainment tolerance override");
  };

  auto* cmd_diag = app.add_subcommand("build-diag", "exact diagonal construction");
  add_build_common(cmd_diag);
  cmd_diag->add_option("--region", region_arg, "validated region spec")->required();
  cmd_diag->add_option("--margin", margin, "region validation margin");
  cmd_diag->add_option("--samples", samples, "validation boundary samples");

  auto* cmd_approx = app.add_subcommand("build-approx", "approximate diagonal construction");
  add_build_common(cmd_approx);
  cmd_approx->add_option("--alphas", alphas_arg, "alpha sequence")->required();
  cmd_approx->add_option("--region", region_arg, "optional region spec");

  auto* cmd_power = app.add_subcommand("build-power", "power diagonal construction");
  add_build_common(cmd_power);
  cmd_power->add_option("--n", n, "number of powers")->required();
  cmd_power->add_option("--rho-model", region_arg, "spectral surrogate disc")->required();

  auto* cmd_perturb = app.add_subcommand("perturb", "Schatten perturbation route");
  add_build_common(cmd_perturb);
  cmd_perturb->add_option("--p", p_exp, "Schatten exponent (> 1)")->required();
  cmd_perturb->add_option("--region", region_arg, "region spec")->required();
  cmd_perturb->add_option("--report", report_path, "perturbation report path");

  auto* cmd_pinch = app.add_subcommand("pinch", "operator-valued diagonal (pinching)");
  cmd_pinch->add_option("--op", op_arg, "operator spec")->required();
  cmd_pinch->add_option("--blocks", blocks_arg, "contraction blocks")->required();
  cmd_pinch->add_option("--out", out_path, "plan output path");
  cmd_pinch->add_option("--tol-pinch", tol_pinch, "pinch identity tolerance");
  cmd_pinch->add_option("--window", window, "window size override");
  cmd_pinch->add_option("--groups", groups, "dense-sequence groups");
  cmd_pinch->add_option("--seed", seed, "deterministic seed");

  auto* cmd_pinchp = app.add_subcommand("pinch-power", "power-tuple pinching");
  cmd_pinchp->add_option("--op", op_arg, "operator spec")->required();
  cmd_pinchp->add_option("--blocks", blocks_arg, "contraction blocks")->required();
  cmd_pinchp->add_option("--n", n, "number of powers")->required();
  cmd_pinchp->add_option("--out", out_path, "plan output path");
  cmd_pinchp->add_option("--tol-pinch", tol_pinch, "pinch identity tolerance");
  cmd_pinchp->add_option("--window", window, "window size override");
  cmd_pinchp->add_option("--groups", groups, "dense-sequence groups");
  cmd_pinchp->add_option("--seed", seed, "deterministic seed");

  auto* cmd_check = app.add_subcommand("check", "necessary-condition checkers");
  cmd_check->add_option("--kind", kind, "blaschke|positive|functional|shift|unitary|kadison")
      ->required();
  cmd_check->add_option("--seq", seq_arg, "sequence (JSON or file)")->required();
  cmd_check->add_option("--op", op_arg, "operator spec (positive/functional)");
  cmd_check->add_option("--region", region_arg, "region spec (blaschke)");
  cmd_check->add_option("--alphas", alphas_arg, "alpha coefficients (functional)");
  cmd_check->add_option("--exponent", exponent, "distance exponent (blaschke)");
  cmd_check->add_option("--out", out_path, "verdict output path");

  auto* cmd_verify = app.add_subcommand("verify", "re-audit emitted artifacts");
  cmd_verify->add_option("--op", op_arg, "operator spec")->required();
  cmd_verify->add_option("--frame", frame_arg, "frame JSON path");
  cmd_verify->add_option("--cert", cert_arg, "certificate JSON path");
  cmd_verify->add_option("--plan", plan_arg, "pinching plan JSON path");

  CLI11_PARSE(app, argc, argv);

  if (cmd_numrange->parsed()) {
    OwnedOp op{load_op_or_die(op_arg)};
    OwnedString csv;
    bforge_status st = bforge_numrange_boundary(op.op, samples, &csv.s);
    if (st == BFORGE_OK) write_file(out_path, csv.s);
    return finish(st, "numrange: " + std::to_string(samples) + " samples -> " + out_path);
  }

  if (cmd_moment->parsed()) {
    const std::string eps = load_arg(targets_arg);
    if (cmd_moment->count("--n")) {
      json j = json::parse(eps, nullptr, false);
      if (j.is_discarded() || !j.is_array() || static_cast<int>(j.size()) != n) {
        std::cerr << "error: --n does not match the eps length\n";
        return 3;
      }
    }
    OwnedString out;
    bforge_status st = bforge_moment_decompose(eps.c_str(), rho, &out.s);
    if (st == BFORGE_OK) {
      if (cmd_moment->count("--out")) {
        write_file(out_path, out.s);
      } else {
        std::cout << out.s << "\n";
        return 0;
      }
    }
    return finish(st, "moment: decomposition -> " + out_path);
  }

  const std::string opts = options_json(steps, seed, groups, margin, samples, tol,
                                        tol_pinch, window);

  if (cmd_diag->parsed()) {
    OwnedOp op{load_op_or_die(op_arg)};
    OwnedString frame, cert;
    bforge_status st = bforge_build_diagonal(op.op, load_arg(region_arg).c_str(),
                                             load_arg(targets_arg).c_str(),
                                             opts.c_str(), &frame.s, &cert.s);
    if (st == BFORGE_OK) {
      write_file(out_path, frame.s);
      write_file(cert_path, cert.s);
      return finish(st, "build-diag: " + cert_summary(cert.s) + " -> " + out_path +
                            ", " + cert_path);
    }
    return finish(st, "");
  }

  if (cmd_approx->parsed()) {
    OwnedOp op{load_op_or_die(op_arg)};
    OwnedString frame, cert;
    const std::string region = region_arg.empty() ? "" : load_arg(region_arg);
    bforge_status st = bforge_build_approx(
        op.op, load_arg(targets_arg).c_str(), load_arg(alphas_arg).c_str(),
        region.empty() ? nullptr : region.c_str(), opts.c_str(), &frame.s, &cert.s);
    if (st == BFORGE_OK) {
      write_file(out_path, frame.s);
      write_file(cert_path, cert.s);
      return finish(st, "build-approx: " + cert_summary(cert.s) + " -> " + out_path +
                            ", " + cert_path);
    }
    return finish(st, "");
  }

  if (cmd_power->parsed()) {
    OwnedOp op{load_op_or_die(op_arg)};
    OwnedString frame, cert;
    bforge_status st = bforge_build_power(op.op, load_arg(targets_arg).c_str(), n,
                                          load_arg(region_arg).c_str(), opts.c_str(),
                                          &frame.s, &cert.s);
    if (st == BFORGE_OK) {
      write_file(out_path, frame.s);
      write_file(cert_path, cert.s);
      return finish(st, "build-power: " + cert_summary(cert.s) + " -> " + out_path +
                            ", " + cert_path);
    }
    return finish(st, "");
  }

  if (cmd_perturb->parsed()) {
    OwnedOp op{load_op_or_die(op_arg)};
    OwnedString frame, cert, report;
    bforge_status st = bforge_build_schatten(op.op, load_arg(targets_arg).c_str(),
                                             p_exp, load_arg(region_arg).c_str(),
                                             opts.c_str(), &frame.s, &cert.s, &report.s);
    if (st == BFORGE_OK) {
      write_file(out_path, frame.s);
      write_file(cert_path, cert.s);
      if (!report_path.empty()) write_file(report_path, report.s);
      return finish(st, "perturb: " + cert_summary(cert.s) + " -> " + out_path + ", " +
                            cert_path);
    }
    return finish(st, "");
  }

  if (cmd_pinch->parsed() || cmd_pinchp->parsed()) {
    OwnedOp op{load_op_or_die(op_arg)};
    OwnedString plan;
    bforge_status st =
        cmd_pinch->parsed()
            ? bforge_pinch(op.op, load_arg(blocks_arg).c_str(), opts.c_str(), &plan.s)
            : bforge_pinch_power(op.op, load_arg(blocks_arg).c_str(), n, opts.c_str(),
                                 &plan.s);
    if (st == BFORGE_OK) {
      write_file(out_path, plan.s);
      json pj = json::parse(plan.s, nullptr, false);
      double worst = 0.0;
      for (const auto& b : pj.value("blocks", json::array()))
        worst = std::max(worst, b.value("pinch_residual", 0.0));
      std::ostringstream os;
      os << (cmd_pinch->parsed() ? "pinch: " : "pinch-power: ")
         << pj.value("blocks", json::array()).size() << " blocks, max residual "
         << worst << " -> " << out_path;
      return finish(st, os.str());
    }
    return finish(st, "");
  }

  if (cmd_check->parsed()) {
    json payload = json::parse(load_arg(seq_arg), nullptr, false);
    if (payload.is_discarded()) {
      std::cerr << "error: malformed sequence JSON\n";
      return 3;
    }
    json req;
    if (kind == "kadison" || kind == "unitary") {
      if (payload.is_array()) {
        req["values"] = payload;
      } else {
        req = payload;
      }
    } else if (kind == "shift") {
      req["points"] = payload.is_object() && payload.contains("points")
                          ? payload["points"]
                          : (payload.is_object() && payload.contains("values")
                                 ? payload["values"]
                                 : payload);
    } else if (kind == "blaschke") {
      req["points"] = payload.is_object() && payload.contains("points")
                          ? payload["points"]
                          : payload;
      req["region"] = json::parse(load_arg(region_arg));
      req["exponent"] = exponent;
    } else if (kind == "positive") {
      req["op"] = json::parse(load_arg(op_arg));
      req["values"] = payload.is_object() && payload.contains("values")
                          ? payload["values"]
                          : payload;
    } else if (kind == "functional") {
      req["op"] = json::parse(load_arg(op_arg));
      req["points"] = payload.is_object() && payload.contains("points")
                          ? payload["points"]
                          : payload;
      req["alphas"] = json::parse(load_arg(alphas_arg));
    } else {
      std::cerr << "error: unknown check kind '" << kind << "'\n";
      return 3;
    }
    OwnedString verdict;
    bforge_status st = bforge_check(kind.c_str(), req.dump().c_str(), &verdict.s);
    if (st == BFORGE_OK || st == BFORGE_VERDICT) {
      if (cmd_check->count("--out")) write_file(out_path, verdict.s);
      json v = json::parse(verdict.s, nullptr, false);
      return finish(st, "check " + kind + ": " + v.value("verdict", std::string("?")));
    }
    return finish(st, "");
  }

  if (cmd_verify->parsed()) {
    OwnedOp op{load_op_or_die(op_arg)};
    OwnedString report;
    bforge_status st;
    if (!plan_arg.empty()) {
      st = bforge_verify_plan(op.op, load_arg(plan_arg).c_str(), &report.s);
    } else if (!frame_arg.empty() && !cert_arg.empty()) {
      st = bforge_verify(op.op, load_arg(frame_arg).c_str(),
                         load_arg(cert_arg).c_str(), &report.s);
    } else {
      std::cerr << "error: verify needs --plan or both --frame and --cert\n";
      return 3;
    }
    if (st == BFORGE_OK) return finish(st, "verify: ok");
    if (st == BFORGE_VERDICT) {
      json r = json::parse(report.s, nullptr, false);
      return finish(st, "verify: FAILED at step " +
                            std::to_string(r.value("failing_step", 0)) + " (" +
                            r.value("reason", std::string()) + ")");
    }
    return finish(st, "");
  }

  return 0;
}
