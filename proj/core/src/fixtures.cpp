#include "kktstab/model.hpp"

#include <cmath>
#include <numbers>

namespace kktstab {

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Vec concat(const Vec& a, const Vec& b) {
  Vec out(a.size() + b.size());
  out << a, b;
  return out;
}

Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

const Mat kE = mat2(1, 1, 1, 1);

// min x1 + x1² + x2²  s.t.  Diag(x) + εA ∈ S²₊ with A = [[0,1],[1,0]].
Fixture example1() {
  Fixture fx;
  auto& p = fx.program;
  p.name = "example1";
  p.n = 2;
  p.objective = {SymMatrix::diagonal(vec({2.0, 2.0})), vec({1.0, 0.0}), 0.0};
  p.cone = Cone::psd(2);
  p.constraint.A0 = Vec::Zero(3);
  p.constraint.Ai = {svec(mat2(1, 0, 0, 0)), svec(mat2(0, 0, 0, 1))};
  fx.reference = {Vec::Zero(2), svec(mat2(-1, 0, 0, 0))};
  fx.direction = {Vec::Zero(2), svec(mat2(0, 1, 1, 0))};
  fx.observable = "x2";
  fx.description = "strongly convex SDP whose solution drifts at rate eps^(2/3)";
  return fx;
}

// min ½x² + x + t  s.t.  t ≥ 0, xI + tA ∈ S²₊ with A = [[1,-2],[-2,1]].
// Variables (x, t); cone R₊ × S²₊.
Fixture example2() {
  Fixture fx;
  auto& p = fx.program;
  p.name = "example2";
  p.n = 2;
  p.objective = {SymMatrix::diagonal(vec({1.0, 0.0})), vec({1.0, 1.0}), 0.0};
  p.cone = Cone({{BlockKind::Orthant, 1}, {BlockKind::PSD, 2}});
  p.constraint.A0 = Vec::Zero(4);
  p.constraint.Ai = {concat(vec({0.0}), svec(Mat::Identity(2, 2))),
                     concat(vec({1.0}), svec(mat2(1, -2, -2, 1)))};

  // Multipliers are (⟨A,Y⟩ − 1, −Y) for Y ⪰ 0 with tr Y = 1 and Y12 ≥ 0.
  auto multiplier = [](double y11, double y12) {
    const Mat y = mat2(y11, y12, y12, 1.0 - y11);
    return concat(vec({-4.0 * y12}), -svec(y));
  };
  fx.reference = {Vec::Zero(2), multiplier(0.5, 0.1)};
  fx.multiplier_samples = {multiplier(0.5, 0.1), multiplier(0.5, 0.0), multiplier(0.5, 0.5),
                           multiplier(1.0, 0.0), multiplier(0.0, 0.0), multiplier(0.25, 0.2)};
  fx.direction = {Vec::Zero(2), concat(vec({0.0}), -svec(Mat::Identity(2, 2)))};
  fx.observable = "x";
  fx.description = "SDP with a non-unique multiplier set and critical cone {0}";
  return fx;
}

}  // namespace

// Data shared with the sweep oracle for the third example.
Mat example3_root_b() { return sqrt_psd(mat2(1.5, -2, -2, 3)); }

Vec example3_shift() {
  return example3_root_b().inverse() * vec({2.5, -1.0});
}

namespace {

// min ½|x + b|² + t  s.t.  t ≥ 0, Diag(B^½ x) + tE + I ∈ S²₊.
// Variables (x1, x2, t); cone R₊ × S²₊.
Fixture example3() {
  Fixture fx;
  auto& p = fx.program;
  p.name = "example3";
  p.n = 3;
  const Mat r = example3_root_b();
  const Vec shift = example3_shift();
  p.objective = {SymMatrix::diagonal(vec({1.0, 1.0, 0.0})), vec({shift(0), shift(1), 1.0}),
                 0.5 * shift.squaredNorm()};
  p.cone = Cone({{BlockKind::Orthant, 1}, {BlockKind::PSD, 2}});
  p.constraint.A0 = concat(vec({0.0}), svec(Mat::Identity(2, 2)));
  p.constraint.Ai = {concat(vec({0.0}), svec(mat2(r(0, 0), 0, 0, r(1, 0)))),
                     concat(vec({0.0}), svec(mat2(r(0, 1), 0, 0, r(1, 1)))),
                     concat(vec({1.0}), svec(kE))};
  const Vec xbar = r.inverse() * vec({-1.0, -1.0});
  fx.reference = {vec({xbar(0), xbar(1), 0.0}), concat(vec({0.0}), -svec(mat2(1, 0, 0, 0)))};
  fx.direction = {Vec::Zero(3), concat(vec({0.0}), svec(mat2(-1, 0, 0, 1)))};
  fx.observable = "multiplier-drift";
  fx.description = "SDP with unique multiplier and SOSC whose multipliers drift at rate eps^(1/2)";
  return fx;
}

// min ½(X11 − 1)² + ½(X22 − 2X12)²  s.t.  ⟨E, X⟩ ≤ 1, X ∈ S²₊, with x = svec(X).
Fixture example4() {
  Fixture fx;
  auto& p = fx.program;
  p.name = "example4";
  p.n = 3;
  const double s2 = std::numbers::sqrt2;
  p.objective = {SymMatrix::from_dense((Mat(3, 3) << 1, 0, 0, 0, 2, -s2, 0, -s2, 1).finished()),
                 vec({-1.0, 0.0, 0.0}), 0.5};
  p.cone = Cone({{BlockKind::Orthant, 1}, {BlockKind::PSD, 2}});
  p.constraint.A0 = concat(vec({1.0}), Vec::Zero(3));
  const Vec e = svec(kE);
  for (int i = 0; i < 3; ++i) p.constraint.Ai.push_back(concat(vec({-e(i)}), Vec::Unit(3, i)));
  fx.reference = {vec({1.0, 0.0, 0.0}), Vec::Zero(4)};
  fx.direction = random_unit_direction(p, 0);
  fx.observable = "full";
  fx.description = "robustly isolated calm SDP without strong regularity";
  return fx;
}

// min x²/2  s.t.  x⁶ sin(1/x) = 0, with sin(1/0) := 0.
Fixture remark2() {
  Fixture fx;
  auto& p = fx.program;
  p.name = "remark2";
  p.n = 1;
  p.objective = {SymMatrix::identity(1), Vec::Zero(1), 0.0};
  p.cone = Cone::zero(1);
  auto nl = std::make_shared<NonlinearConstraint>();
  nl->value = [](const Vec& x) {
    const double t = x(0);
    return vec({t == 0.0 ? 0.0 : std::pow(t, 6) * std::sin(1.0 / t)});
  };
  nl->jacobian = [](const Vec& x) {
    const double t = x(0);
    Mat j(1, 1);
    j(0, 0) = t == 0.0 ? 0.0
                       : 6 * std::pow(t, 5) * std::sin(1.0 / t) - std::pow(t, 4) * std::cos(1.0 / t);
    return j;
  };
  nl->curvature = [](const Vec& x, const Vec& y) {
    const double t = x(0);
    Mat h(1, 1);
    h(0, 0) = t == 0.0 ? 0.0
                       : y(0) * ((30 * std::pow(t, 4) - t * t) * std::sin(1.0 / t) -
                                 10 * std::pow(t, 3) * std::cos(1.0 / t));
    return h;
  };
  p.nonlinear = nl;
  fx.reference = {Vec::Zero(1), Vec::Zero(1)};
  fx.direction = {vec({1.0}), Vec::Zero(1)};
  fx.observable = "x";
  fx.description = "strict local minimizer that is not isolated (non-affine constraint)";
  return fx;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"example1", "example2", "example3", "example4", "remark2"};
}

Fixture builtin_fixture(const std::string& name) {
  if (name == "example1") return example1();
  if (name == "example2") return example2();
  if (name == "example3") return example3();
  if (name == "example4") return example4();
  if (name == "remark2") return remark2();
  throw std::invalid_argument("unknown builtin problem '" + name + "'");
}

ConicProgram builtin(const std::string& name) { return builtin_fixture(name).program; }

}  // namespace kktstab
