#include "kktstab/model.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <random>
#include <sstream>

namespace kktstab {

using nlohmann::json;

Vec AffineMap::eval(const Vec& x) const {
  Vec g = A0;
  for (std::size_t i = 0; i < Ai.size(); ++i) g += x(static_cast<Eigen::Index>(i)) * Ai[i];
  return g;
}

Mat AffineMap::jacobian() const {
  Mat j(A0.size(), static_cast<Eigen::Index>(Ai.size()));
  for (std::size_t i = 0; i < Ai.size(); ++i) j.col(static_cast<Eigen::Index>(i)) = Ai[i];
  return j;
}

double ConicProgram::f(const Vec& x) const {
  return 0.5 * x.dot(objective.Q.dense() * x) + objective.c.dot(x) + objective.c0;
}

Vec ConicProgram::grad_f(const Vec& x) const { return objective.Q.dense() * x + objective.c; }

Vec ConicProgram::G(const Vec& x) const {
  return nonlinear ? nonlinear->value(x) : constraint.eval(x);
}

Mat ConicProgram::jacobian(const Vec& x) const {
  return nonlinear ? nonlinear->jacobian(x) : constraint.jacobian();
}

Mat ConicProgram::hessian_lagrangian(const Vec& x, const Vec& y) const {
  Mat h = objective.Q.dense();
  if (nonlinear) h += nonlinear->curvature(x, y);
  return h;
}

Perturbation ConicProgram::zero_perturbation() const {
  return {Vec::Zero(n), Vec::Zero(cone.dim())};
}

void ConicProgram::validate() const {
  if (n < 1) throw ValidationError("n must be >= 1");
  if (objective.Q.size() != n) throw ValidationError("objective.Q must be n x n");
  if (objective.c.size() != n) throw ValidationError("objective.c must have length n");
  if (cone.blocks().empty()) throw ValidationError("cone must have at least one block");
  if (nonlinear) return;
  if (constraint.A0.size() != cone.dim()) {
    throw ValidationError("constraint.A0 has length " + std::to_string(constraint.A0.size()) +
                          ", cone dimension is " + std::to_string(cone.dim()));
  }
  if (static_cast<int>(constraint.Ai.size()) != n) {
    throw ValidationError("constraint.Ai has " + std::to_string(constraint.Ai.size()) +
                          " entries, expected n = " + std::to_string(n));
  }
  for (std::size_t i = 0; i < constraint.Ai.size(); ++i) {
    if (constraint.Ai[i].size() != cone.dim()) {
      throw ValidationError("constraint.Ai[" + std::to_string(i) + "] has wrong length");
    }
  }
}

Evaluation evaluate(const ConicProgram& prog, const Vec& x, const Perturbation& pert) {
  if (x.size() != prog.n || pert.a.size() != prog.n || pert.b.size() != prog.cone.dim()) {
    throw std::invalid_argument("evaluate: dimension mismatch");
  }
  return {prog.f(x) - pert.a.dot(x), prog.grad_f(x) - pert.a, prog.G(x) + pert.b};
}

// ---- JSON ---------------------------------------------------------------------

namespace {

const json& field(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object()) throw ParseError(ctx + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(ctx + ": missing field '" + key + "'");
  return *it;
}

double number(const json& j, const std::string& ctx) {
  if (!j.is_number()) throw ParseError(ctx + ": expected a number");
  return j.get<double>();
}

Vec vector(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw ParseError(ctx + ": expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number(j[i], ctx + "[" + std::to_string(i) + "]");
  }
  return v;
}

json to_json(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

BlockKind parse_kind(const std::string& s, const std::string& ctx) {
  if (s == "zero") return BlockKind::Zero;
  if (s == "orthant") return BlockKind::Orthant;
  if (s == "soc") return BlockKind::SOC;
  if (s == "psd") return BlockKind::PSD;
  throw ParseError(ctx + ": unknown cone type '" + s + "'");
}

SymMatrix parse_q(const json& j, int n) {
  const std::string ctx = "objective.Q";
  if (!j.is_array()) throw ParseError(ctx + ": expected an array");
  Mat q(n, n);
  if (!j.empty() && j[0].is_array()) {
    if (static_cast<int>(j.size()) != n) throw ValidationError(ctx + ": expected n rows");
    for (int i = 0; i < n; ++i) {
      const Vec row = vector(j[i], ctx + "[" + std::to_string(i) + "]");
      if (row.size() != n) throw ValidationError(ctx + ": row " + std::to_string(i) + " must have n entries");
      q.row(i) = row.transpose();
    }
  } else {
    const Vec flat = vector(j, ctx);
    if (flat.size() != static_cast<Eigen::Index>(n) * n) throw ValidationError(ctx + ": expected n*n entries");
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) q(i, k) = flat(i * n + k);
  }
  try {
    return SymMatrix::from_dense(q);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("objective.Q: ") + e.what());
  }
}

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ProblemFile parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("syntax error at line " + std::to_string(line) + ", column " +
                     std::to_string(col) + ": " + e.what());
  }

  ProblemFile out;
  ConicProgram& p = out.program;
  const json& name = field(doc, "name", "problem");
  if (!name.is_string()) throw ParseError("name: expected a string");
  p.name = name.get<std::string>();
  const json& n = field(doc, "n", "problem");
  if (!n.is_number_integer()) throw ParseError("n: expected an integer");
  p.n = n.get<int>();
  if (p.n < 1) throw ValidationError("n must be >= 1");

  const json& obj = field(doc, "objective", "problem");
  p.objective.Q = parse_q(field(obj, "Q", "objective"), p.n);
  p.objective.c = vector(field(obj, "c", "objective"), "objective.c");
  p.objective.c0 = obj.contains("c0") ? number(obj["c0"], "objective.c0") : 0.0;

  const json& cone = field(doc, "cone", "problem");
  if (!cone.is_array()) throw ParseError("cone: expected an array of blocks");
  std::vector<ConeBlock> blocks;
  for (std::size_t k = 0; k < cone.size(); ++k) {
    const std::string ctx = "cone[" + std::to_string(k) + "]";
    const json& type = field(cone[k], "type", ctx);
    if (!type.is_string()) throw ParseError(ctx + ".type: expected a string");
    const json& size = field(cone[k], "size", ctx);
    if (!size.is_number_integer()) throw ParseError(ctx + ".size: expected an integer");
    if (size.get<int>() < 1) throw ValidationError(ctx + ".size must be >= 1");
    blocks.push_back({parse_kind(type.get<std::string>(), ctx + ".type"), size.get<int>()});
  }
  p.cone = Cone(std::move(blocks));

  const json& con = field(doc, "constraint", "problem");
  p.constraint.A0 = vector(field(con, "A0", "constraint"), "constraint.A0");
  const json& ai = field(con, "Ai", "constraint");
  if (!ai.is_array()) throw ParseError("constraint.Ai: expected an array of arrays");
  for (std::size_t i = 0; i < ai.size(); ++i) {
    p.constraint.Ai.push_back(vector(ai[i], "constraint.Ai[" + std::to_string(i) + "]"));
  }
  p.validate();

  if (doc.contains("reference")) {
    const json& ref = doc["reference"];
    ReferencePoint r{vector(field(ref, "x", "reference"), "reference.x"),
                     vector(field(ref, "y", "reference"), "reference.y")};
    if (r.x.size() != p.n) throw ValidationError("reference.x must have length n");
    if (r.y.size() != p.cone.dim()) throw ValidationError("reference.y must match the cone dimension");
    out.reference = std::move(r);
  }
  return out;
}

ConicProgram load_problem(const std::string& text) { return parse_problem(text).program; }

ProblemFile load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

std::string save_problem(const ConicProgram& prog, const std::optional<ReferencePoint>& reference) {
  if (!prog.is_affine()) throw ValidationError("programs with a non-affine constraint cannot be saved");
  prog.validate();
  json doc;
  doc["name"] = prog.name;
  doc["n"] = prog.n;
  json q = json::array();
  const Mat qd = prog.objective.Q.dense();
  for (int i = 0; i < prog.n; ++i) q.push_back(to_json(qd.row(i).transpose()));
  doc["objective"] = {{"Q", q}, {"c", to_json(prog.objective.c)}, {"c0", prog.objective.c0}};
  json ai = json::array();
  for (const auto& a : prog.constraint.Ai) ai.push_back(to_json(a));
  doc["constraint"] = {{"A0", to_json(prog.constraint.A0)}, {"Ai", ai}};
  json cone = json::array();
  for (const auto& b : prog.cone.blocks()) cone.push_back({{"type", to_string(b.kind)}, {"size", b.size}});
  doc["cone"] = cone;
  if (reference) doc["reference"] = {{"x", to_json(reference->x)}, {"y", to_json(reference->y)}};
  return doc.dump(2) + "\n";
}

Perturbation random_unit_direction(const ConicProgram& prog, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Perturbation p{Vec(prog.n), Vec(prog.cone.dim())};
  for (Eigen::Index i = 0; i < p.a.size(); ++i) p.a(i) = normal(rng);
  for (Eigen::Index i = 0; i < p.b.size(); ++i) p.b(i) = normal(rng);
  const double norm = std::sqrt(p.a.squaredNorm() + p.b.squaredNorm());
  p.a /= norm;
  p.b /= norm;
  return p;
}

}  // namespace kktstab
