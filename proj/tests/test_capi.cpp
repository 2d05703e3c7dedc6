#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "bforge.h"

namespace {

struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { bforge_string_free(s); }
  std::string str() const { return s ? std::string(s) : std::string(); }
};

struct OwnedOp {
  bforge_operator* op = nullptr;
  ~OwnedOp() { bforge_operator_free(op); }
};

}  // namespace

TEST_CASE("operator load, dim, bandwidth, and free") {
  OwnedOp h;
  REQUIRE(bforge_operator_load(R"({"kind":"shift","dim":16})", &h.op) == BFORGE_OK);
  CHECK(bforge_operator_dim(h.op) == 16);
  CHECK(bforge_operator_bandwidth(h.op) == 1);
}

TEST_CASE("every generator kind loads through the JSON spec") {
  OwnedOp a, b, c, d;
  CHECK(bforge_operator_load(
            R"({"kind":"weighted_shift","dim":4,"weights":[1.0,[0.5,0.5],2.0]})",
            &a.op) == BFORGE_OK);
  CHECK(bforge_operator_dim(a.op) == 4);
  CHECK(bforge_operator_load(R"({"kind":"jordan","dim":3,"lambda":[0.5,-0.5]})",
                             &b.op) == BFORGE_OK);
  CHECK(bforge_operator_load(
            R"({"kind":"dense","dim":2,"entries":[[[0,0],[1,0]],[[0,0],[0,0]]]})",
            &c.op) == BFORGE_OK);
  CHECK(bforge_operator_bandwidth(c.op) == 1);
  CHECK(bforge_operator_load(R"({"kind":"diagonal","entries":[-1,0.5,0.25]})",
                             &d.op) == BFORGE_OK);
  CHECK(bforge_operator_dim(d.op) == 3);
}

TEST_CASE("malformed specs surface BFORGE_INPUT with a message") {
  bforge_operator* op = nullptr;
  CHECK(bforge_operator_load("{not json", &op) == BFORGE_INPUT);
  CHECK(std::string(bforge_last_error()).size() > 0);
  CHECK(bforge_operator_load(R"({"kind":"shift","dim":0})", &op) == BFORGE_INPUT);
}

TEST_CASE("moment decomposition round trip through the C surface") {
  OwnedString out;
  REQUIRE(bforge_moment_decompose("[[0.0,0.0],[0.3,0.0]]", 1.0, &out.s) == BFORGE_OK);
  const std::string j = out.str();
  CHECK(j.find("\"schema\": \"blaschke-forge/1\"") != std::string::npos);
  CHECK(j.find("\"weights\"") != std::string::npos);
}

TEST_CASE("build-diagonal end to end with verification") {
  OwnedOp h;
  REQUIRE(bforge_operator_load(R"({"kind":"shift","dim":64})", &h.op) == BFORGE_OK);
  OwnedString frame, cert;
  const char* region = R"({"shape":"disc","center":[0.0,0.0],"radius":0.9})";
  const char* targets = "[[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]]";
  const char* options = R"({"steps":4,"margin":0.02,"samples":90})";
  REQUIRE(bforge_build_diagonal(h.op, region, targets, options, &frame.s, &cert.s) ==
          BFORGE_OK);
  OwnedString report;
  CHECK(bforge_verify(h.op, frame.s, cert.s, &report.s) == BFORGE_OK);
  CHECK(report.str().find("\"ok\": true") != std::string::npos);
}

TEST_CASE("byte-stable outputs for a fixed seed") {
  OwnedOp h;
  REQUIRE(bforge_operator_load(R"({"kind":"shift","dim":48})", &h.op) == BFORGE_OK);
  const char* region = R"({"shape":"disc","center":[0.0,0.0],"radius":0.85})";
  const char* targets = "[[0.1,0.05],[0.0,0.0],[0.2,-0.1]]";
  const char* options = R"({"steps":3,"margin":0.02,"samples":60,"seed":7})";
  OwnedString f1, c1, f2, c2;
  REQUIRE(bforge_build_diagonal(h.op, region, targets, options, &f1.s, &c1.s) == BFORGE_OK);
  REQUIRE(bforge_build_diagonal(h.op, region, targets, options, &f2.s, &c2.s) == BFORGE_OK);
  CHECK(f1.str() == f2.str());
  CHECK(c1.str() == c2.str());
}

TEST_CASE("pinch plan round trip through verify_plan") {
  OwnedOp h;
  REQUIRE(bforge_operator_load(R"({"kind":"shift","dim":512})", &h.op) == BFORGE_OK);
  OwnedString plan;
  REQUIRE(bforge_pinch(h.op, "[[[0.0,0.0]]]", "{}", &plan.s) == BFORGE_OK);
  OwnedString report;
  CHECK(bforge_verify_plan(h.op, plan.s, &report.s) == BFORGE_OK);
  CHECK(report.str().find("\"ok\": true") != std::string::npos);
}

TEST_CASE("check surfaces: kadison verdicts and exit mapping") {
  OwnedString v1, v2, v3;
  CHECK(bforge_check("kadison", R"({"values":[0.5]})", &v1.s) == BFORGE_OK);
  CHECK(v1.str().find("divergent-admissible") != std::string::npos);
  CHECK(bforge_check("kadison", R"({"values":[0.75,0.25],"tail":0.0})", &v2.s) ==
        BFORGE_OK);
  CHECK(v2.str().find("\"admissible\"") != std::string::npos);
  CHECK(bforge_check("kadison", R"({"values":[0.75,0.3333333333333333],"tail":0.0})",
                     &v3.s) == BFORGE_VERDICT);
  CHECK(v3.str().find("inadmissible") != std::string::npos);
}

TEST_CASE("check surfaces: unitary and shift") {
  OwnedString v1, v2;
  CHECK(bforge_check("unitary", R"({"values":[0.9,1.0],"tail":1.0})", &v1.s) ==
        BFORGE_VERDICT);
  std::string pts = "{\"points\":[";
  for (int k = 1; k <= 400; ++k) {
    pts += "[" + std::to_string(1.0 - 1.0 / k) + ",0.0]";
    if (k != 400) pts += ",";
  }
  pts += "]}";
  CHECK(bforge_check("shift", pts.c_str(), &v2.s) == BFORGE_OK);
  CHECK(v2.str().find("is-diagonal") != std::string::npos);
}

TEST_CASE("numrange boundary emits the CSV header") {
  OwnedOp h;
  REQUIRE(bforge_operator_load(R"({"kind":"diagonal","dim":2,"entries":[0.0,1.0]})",
                               &h.op) == BFORGE_OK);
  OwnedString csv;
  REQUIRE(bforge_numrange_boundary(h.op, 8, &csv.s) == BFORGE_OK);
  CHECK(csv.str().rfind("theta,value,re,im\n", 0) == 0);
}

TEST_CASE("serialized artifacts round trip byte-identically") {
  OwnedOp h;
  REQUIRE(bforge_operator_load(R"({"kind":"shift","dim":48})", &h.op) == BFORGE_OK);
  OwnedString f1, c1;
  const char* region = R"({"shape":"disc","center":[0.0,0.0],"radius":0.85})";
  const char* targets = "[[0.0,0.0],[0.1,0.0]]";
  REQUIRE(bforge_build_diagonal(h.op, region, targets,
                                R"({"steps":2,"margin":0.02,"samples":60})", &f1.s,
                                &c1.s) == BFORGE_OK);
  // verify consumes exactly what was emitted
  OwnedString rep;
  CHECK(bforge_verify(h.op, f1.s, c1.s, &rep.s) == BFORGE_OK);
}

TEST_CASE("tampered frames fail verification with the failing step") {
  OwnedOp h;
  REQUIRE(bforge_operator_load(R"({"kind":"shift","dim":48})", &h.op) == BFORGE_OK);
  OwnedString f1, c1;
  const char* region = R"({"shape":"disc","center":[0.0,0.0],"radius":0.85})";
  const char* targets = "[[0.0,0.0],[0.1,0.0],[0.0,0.0]]";
  REQUIRE(bforge_build_diagonal(h.op, region, targets,
                                R"({"steps":3,"margin":0.02,"samples":60})", &f1.s,
                                &c1.s) == BFORGE_OK);
  std::string frame = f1.str();
  // zero out a stored coordinate pair: breaks unit norm at some step
  const size_t pos = frame.rfind("0.");
  std::string broken = frame.substr(0, pos) + "9." + frame.substr(pos + 2);
  OwnedString rep;
  CHECK(bforge_verify(h.op, broken.c_str(), c1.s, &rep.s) == BFORGE_VERDICT);
  CHECK(rep.str().find("\"ok\": false") != std::string::npos);
}

TEST_CASE("numeric failures map to BFORGE_NUMERIC") {
  OwnedOp h;
  REQUIRE(bforge_operator_load(R"({"kind":"shift","dim":16})", &h.op) == BFORGE_OK);
  OwnedString plan;
  // 16 blocks cannot fit in a 16-dimensional truncation
  std::string blocks = "[";
  for (int k = 0; k < 16; ++k) blocks += std::string("[[0.0,0.0]]") + (k < 15 ? "," : "");
  blocks += "]";
  CHECK(bforge_pinch(h.op, blocks.c_str(), "{}", &plan.s) == BFORGE_NUMERIC);
}
