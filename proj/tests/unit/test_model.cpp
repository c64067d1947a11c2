#include "kktstab/kkt.hpp"
#include "kktstab/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

using namespace kktstab;

namespace {

const char* kTiny = R"({
  "name": "tiny",
  "n": 1,
  "objective": {"Q": [[2]], "c": [-2], "c0": 1},
  "cone": [{"type": "orthant", "size": 1}],
  "constraint": {"A0": [0], "Ai": [[1]]},
  "reference": {"x": [1], "y": [0]}
})";

}  // namespace

TEST(ParseProblem, ReadsAllFields) {
  const ProblemFile pf = parse_problem(kTiny);
  const ConicProgram& p = pf.program;
  EXPECT_EQ(p.name, "tiny");
  EXPECT_EQ(p.n, 1);
  EXPECT_EQ(p.objective.Q(0, 0), 2.0);
  EXPECT_EQ(p.cone, Cone::orthant(1));
  ASSERT_TRUE(pf.reference.has_value());
  EXPECT_EQ(pf.reference->x(0), 1.0);
  EXPECT_DOUBLE_EQ(p.f(Vec::Ones(1)), 0.0);
}

TEST(ParseProblem, ReportsSyntaxErrorPosition) {
  try {
    parse_problem("{\n  \"name\": ,\n}");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(ParseProblem, NamesMissingField) {
  try {
    parse_problem(R"({"name": "x", "n": 1})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("objective"), std::string::npos) << e.what();
  }
}

TEST(ParseProblem, RejectsInconsistentDimensions) {
  std::string bad = kTiny;
  bad.replace(bad.find("\"A0\": [0]"), 9, "\"A0\": [0, 1]");
  EXPECT_THROW(parse_problem(bad), ValidationError);
}

TEST(ParseProblem, AcceptsFlatQ) {
  std::string flat = kTiny;
  flat.replace(flat.find("[[2]]"), 5, "[2]");
  EXPECT_EQ(parse_problem(flat).program.objective.Q(0, 0), 2.0);
}

TEST(SaveProblem, RoundTripsBuiltins) {
  for (const std::string name : {"example1", "example2", "example3", "example4"}) {
    const Fixture fx = builtin_fixture(name);
    const ProblemFile back = parse_problem(save_problem(fx.program, fx.reference));
    EXPECT_EQ(back.program.cone, fx.program.cone) << name;
    EXPECT_EQ(back.program.objective.Q, fx.program.objective.Q) << name;
    EXPECT_EQ(back.program.objective.c, fx.program.objective.c) << name;
    ASSERT_TRUE(back.reference.has_value());
    EXPECT_EQ(back.reference->y, fx.reference.y) << name;
  }
}

TEST(SaveProblem, RefusesNonAffine) { EXPECT_THROW(save_problem(builtin("remark2")), ValidationError); }

TEST(LoadProblemFile, MissingFileIsAnError) {
  EXPECT_ANY_THROW(load_problem_file("/nonexistent/problem.json"));
}

TEST(LoadProblemFile, ReadsFromDisk) {
  const std::string path = ::testing::TempDir() + "kktstab_tiny.json";
  std::ofstream(path) << kTiny;
  EXPECT_EQ(load_problem_file(path).program.name, "tiny");
  std::remove(path.c_str());
}

TEST(Builtins, ReferencePointsAreKkt) {
  for (const auto& name : builtin_names()) {
    const Fixture fx = builtin_fixture(name);
    EXPECT_LE(natural_residual(fx.program, fx.reference.x, fx.reference.y, fx.program.zero_perturbation()), 1e-12)
        << name;
    EXPECT_NO_THROW(fx.program.validate()) << name;
  }
  EXPECT_THROW(builtin("nope"), std::invalid_argument);
}

TEST(Builtins, Example2MultiplierSamplesAreKkt) {
  const Fixture fx = builtin_fixture("example2");
  ASSERT_FALSE(fx.multiplier_samples.empty());
  for (const Vec& y : fx.multiplier_samples) {
    EXPECT_LE(natural_residual(fx.program, fx.reference.x, y, fx.program.zero_perturbation()), 1e-12);
  }
}

TEST(Builtins, Example3ReferenceMatchesClosedForm) {
  // x̄ = B^(-1/2)(-1, -1), t̄ = 0, Ȳ = diag(1, 0).
  const Fixture fx = builtin_fixture("example3");
  const Vec bx = example3_root_b() * fx.reference.x.head(2);
  EXPECT_NEAR(bx(0), -1.0, 1e-14);
  EXPECT_NEAR(bx(1), -1.0, 1e-14);
  EXPECT_EQ(fx.reference.x(2), 0.0);
  const Mat rb = example3_root_b();
  EXPECT_LE((rb * rb - (Mat(2, 2) << 1.5, -2, -2, 3).finished()).norm(), 1e-14);
}

TEST(Builtins, Remark2CallbacksVanishAtOrigin) {
  const ConicProgram p = builtin("remark2");
  EXPECT_FALSE(p.is_affine());
  EXPECT_EQ(p.G(Vec::Zero(1))(0), 0.0);
  EXPECT_EQ(p.jacobian(Vec::Zero(1))(0, 0), 0.0);
  // G(x) = x⁶ sin(1/x) has zeros at x = 1/(kπ) accumulating at 0.
  const double t = 1.0 / (7.0 * std::numbers::pi);
  EXPECT_NEAR(p.G(Vec::Constant(1, t))(0), 0.0, 1e-20);
  // Derivative check away from 0.
  const double s = 0.3, h = 1e-6;
  const double fd = (p.G(Vec::Constant(1, s + h))(0) - p.G(Vec::Constant(1, s - h))(0)) / (2 * h);
  EXPECT_NEAR(p.jacobian(Vec::Constant(1, s))(0, 0), fd, 1e-8);
}

TEST(RandomDirection, UnitAndDeterministic) {
  const ConicProgram p = builtin("example4");
  const Perturbation a = random_unit_direction(p, 3), b = random_unit_direction(p, 3);
  EXPECT_NEAR(std::hypot(a.a.norm(), a.b.norm()), 1.0, 1e-14);
  EXPECT_EQ(a.a, b.a);
  EXPECT_NE(a.a, random_unit_direction(p, 4).a);
}
