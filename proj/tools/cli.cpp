#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gexp/analytic_uniform.hpp"
#include "gexp/estimators.hpp"
#include "gexp/experiments.hpp"
#include "gexp/losses.hpp"
#include "gexp/models.hpp"
#include "gexp/stats.hpp"

namespace gexp::cli {
namespace {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Text helpers

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(what + ": not a number: '" + s + "'");
  }
}

std::vector<double> to_doubles(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) {
    if (part.empty()) throw ValidationError(what + ": empty list entry");
    out.push_back(to_double(part, what));
  }
  if (out.empty()) throw ValidationError(what + ": empty list");
  return out;
}

Vector to_vector(const std::vector<double>& xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t k = 0; k < xs.size(); ++k) v[static_cast<Eigen::Index>(k)] = xs[k];
  return v;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Model specs

MarginSpec parse_margin(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = trim(text.substr(0, colon));
  const std::vector<double> p =
      colon == std::string::npos ? std::vector<double>{} : to_doubles(text.substr(colon + 1), "margin " + name);
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (p.size() < lo || p.size() > hi) {
      throw ValidationError("margin " + name + ": expected " + std::to_string(lo) +
                            (lo == hi ? "" : ".." + std::to_string(hi)) + " parameters");
    }
  };
  auto at = [&](std::size_t k, double dflt) { return k < p.size() ? p[k] : dflt; };
  MarginSpec m;
  if (name == "normal") {
    need(0, 2);
    m = Normal{at(0, 0), at(1, 1)};
  } else if (name == "t") {
    need(1, 1);
    m = StudentT{p[0]};
  } else if (name == "skewnormal") {
    need(3, 3);
    m = SkewNormal{p[0], p[1], p[2]};
  } else if (name == "gumbel") {
    need(0, 2);
    m = Gumbel{at(0, 0), at(1, 1)};
  } else if (name == "logistic") {
    need(0, 2);
    m = Logistic{at(0, 0), at(1, 1)};
  } else if (name == "exponential") {
    need(1, 1);
    m = Exponential{p[0]};
  } else if (name == "uniform") {
    need(0, 2);
    m = Uniform{at(0, 0), at(1, 1)};
  } else {
    throw ValidationError("unknown margin '" + name + "'");
  }
  validate(m);
  return m;
}

CopulaSpec parse_copula(const std::string& text, int d) {
  const auto colon = text.find(':');
  const std::string name = trim(text.substr(0, colon));
  if (name == "independence") return Independence{d};
  if (colon == std::string::npos) throw ValidationError("copula " + name + ": missing parameter");
  const double theta = to_double(trim(text.substr(colon + 1)), "copula " + name);
  if (name == "clayton") return Clayton{theta, d};
  if (name == "gumbel") return GumbelCopula{theta, d};
  if (name == "frank") return Frank{theta, d};
  throw ValidationError("unknown copula '" + name + "'");
}

// ---------------------------------------------------------------------------
// Options shared by the subcommands

struct Options {
  std::string model;
  std::string margins;
  std::string copula = "independence";
  double lambda = 0.0;
  std::uint64_t seed = 1;
  long long n = 10000;
  std::string data;
  std::string out;
  std::string alpha;
  double level = 0.0;
  std::string path = "circle:0.98";
  int nphi = 64;
  std::string measure = "expectile";
  double r = 0.2;
  std::string thetas = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,0.999";
  std::string direction;
  std::string levels = "0.5,0.6,0.7,0.8,0.9,0.95,0.99";
  double r_step = 0.01;
  double r_max = 0.99;
  std::string r_list;
  std::string box = "0,1,0,1";
  double tol = 1e-8;
  int max_iter = 500;
  std::string config;
};

struct Context {
  Options opt;
  CLI::App* sub = nullptr;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  [[nodiscard]] bool given(const std::string& name) const { return sub->count("--" + name) > 0; }

  [[nodiscard]] SolverConfig solver() const {
    SolverConfig cfg;
    cfg.grad_tolerance = opt.tol;
    cfg.max_iterations = opt.max_iter;
    cfg.validate();
    return cfg;
  }

  [[nodiscard]] Rng stage(const std::string& name) const { return Rng(opt.seed).substream(name); }
};

Model resolve_model(const Context& ctx, const std::string& fallback) {
  const Options& o = ctx.opt;
  if (!o.margins.empty()) {
    if (ctx.given("model")) throw ValidationError("--model and --margins are mutually exclusive");
    JointModel jm;
    for (const auto& part : split(o.margins, ';')) jm.margins.push_back(parse_margin(part));
    jm.copula = parse_copula(o.copula, jm.dim());
    jm.validate();
    if (o.lambda > 0.0) {
      CompoundPoissonModel cp{o.lambda, jm};
      cp.validate();
      return cp;
    }
    return jm;
  }
  const std::string name = o.model.empty() ? fallback : o.model;
  const auto m = presets::by_name(name);
  if (!m) {
    std::string known;
    for (const auto& k : presets::names()) known += (known.empty() ? "" : ", ") + k;
    throw ValidationError("unknown model '" + name + "' (known: " + known + ")");
  }
  return *m;
}

Sample read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open data file '" + path + "'");
  std::string line;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  bool header = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      width = split(line, ',').size();
      continue;
    }
    std::vector<double> row;
    for (const auto& cell : split(line, ','))
      row.push_back(to_double(cell, path + ":" + std::to_string(lineno)));
    if (row.size() != width) throw ValidationError(path + ":" + std::to_string(lineno) + ": wrong column count");
    rows.push_back(std::move(row));
  }
  if (width == 0) throw ValidationError("data file '" + path + "' has no header");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return Sample(std::move(m));
}

Sample load_sample(const Context& ctx, const std::string& fallback_model) {
  if (!ctx.opt.data.empty()) return read_csv(ctx.opt.data);
  if (ctx.opt.n < 0) throw ValidationError("--n must be >= 0");
  Rng rng = ctx.stage("simulate");
  return simulate(resolve_model(ctx, fallback_model), ctx.opt.n, rng);
}

Index resolve_index(const Context& ctx, Eigen::Index d) {
  if (ctx.given("alpha") && ctx.given("level")) throw ValidationError("--alpha and --level are mutually exclusive");
  if (ctx.given("level")) {
    Vector dir = Vector::Zero(d);
    dir[0] = 1.0;
    if (!ctx.opt.direction.empty()) {
      dir = to_vector(to_doubles(ctx.opt.direction, "--direction"));
      if (dir.size() != d || dir.norm() == 0.0) throw ValidationError("--direction: wrong dimension or zero");
      dir.normalize();
    }
    return Index(index_from_level(ctx.opt.level) * dir);
  }
  if (ctx.opt.alpha.empty()) return Index::zero(d);
  Vector a = to_vector(to_doubles(ctx.opt.alpha, "--alpha"));
  if (a.size() != d) throw ValidationError("--alpha: expected " + std::to_string(d) + " components");
  return Index(std::move(a));
}

Vector resolve_direction(const Context& ctx, Eigen::Index d, double sign) {
  Vector u = ctx.opt.direction.empty() ? Vector(Vector::Ones(d) * sign)
                                       : to_vector(to_doubles(ctx.opt.direction, "--direction"));
  if (u.size() != d || u.norm() == 0.0) throw ValidationError("--direction: wrong dimension or zero");
  return u.normalized();
}

LossKind resolve_measure(const Context& ctx) {
  const auto& m = ctx.opt.measure;
  if (m == "expectile") return LossKind::expectile;
  if (m == "var" || m == "quantile") return LossKind::quantile;
  throw ValidationError("--measure must be expectile or var");
}

IndexPath resolve_path(const Context& ctx, Eigen::Index d) {
  const std::string& text = ctx.opt.path;
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ValidationError("--path: expected kind:parameters");
  const std::string kind = text.substr(0, colon);
  const std::vector<double> p = to_doubles(text.substr(colon + 1), "--path");
  IndexPath path;
  path.n_phi = ctx.opt.nphi;
  if (path.n_phi < 1) throw ValidationError("--nphi must be >= 1");
  auto need = [&](std::size_t k) {
    if (p.size() != k) throw ValidationError("--path " + kind + ": expected " + std::to_string(k) + " parameters");
  };
  if (kind == "circle") {
    need(1);
    path.shape = Circle{p[0]};
  } else if (kind == "ellipse") {
    need(2);
    path.shape = Ellipse{p[0], p[1]};
  } else if (kind == "quarter") {
    need(1);
    path.shape = QuarterCircle{p[0]};
  } else if (kind == "quarter-ellipse") {
    need(2);
    path.shape = QuarterEllipse{p[0], p[1]};
  } else if (kind == "ray") {
    need(static_cast<std::size_t>(d));
    Vector u = to_vector(p);
    if (u.norm() == 0.0) throw ValidationError("--path ray: zero direction");
    path.shape = Ray{u.normalized(), magnitude_grid(ctx.opt.r_step, ctx.opt.r_max)};
  } else {
    throw ValidationError("--path: unknown kind '" + kind + "'");
  }
  return path;
}

// ---------------------------------------------------------------------------
// Output

class Output {
 public:
  explicit Output(const Context& ctx) : ctx_(ctx) {
    if (!ctx.opt.out.empty()) {
      file_.open(ctx.opt.out, std::ios::binary | std::ios::trunc);
      if (!file_) throw ValidationError("cannot open output file '" + ctx.opt.out + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : *ctx_.out; }

  void header(const std::vector<std::string>& cols) { line(cols); }
  void line(const std::vector<std::string>& cells) {
    std::ostream& s = stream();
    for (std::size_t k = 0; k < cells.size(); ++k) s << (k ? "," : "") << cells[k];
    s << '\n';
  }
  void note(const std::string& key, const std::string& value) { stream() << "# " << key << '=' << value << '\n'; }

 private:
  const Context& ctx_;
  std::ofstream file_;
};

std::vector<std::string> x_columns(Eigen::Index d, const std::string& prefix = "x") {
  std::vector<std::string> cols;
  for (Eigen::Index j = 1; j <= d; ++j) cols.push_back(prefix + std::to_string(j));
  return cols;
}

void append_point(std::vector<std::string>& cells, const Vector& v) {
  for (Eigen::Index j = 0; j < v.size(); ++j) cells.push_back(num(v[j]));
}

std::string flag(bool b) { return b ? "1" : "0"; }

void write_curve(Output& out, const Curve& curve, Eigen::Index d) {
  auto cols = x_columns(d);
  cols.insert(cols.begin(), "param");
  cols.push_back("converged");
  out.header(cols);
  for (const auto& p : curve.points) {
    std::vector<std::string> cells{num(p.param)};
    append_point(cells, p.point);
    cells.push_back(flag(p.converged));
    out.line(cells);
  }
  out.note("all_converged", flag(curve.all_converged()));
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_simulate(Context& ctx) {
  Rng rng = ctx.stage("simulate");
  if (ctx.opt.n < 0) throw ValidationError("--n must be >= 0");
  const Sample s = simulate(resolve_model(ctx, "X1"), ctx.opt.n, rng);
  Output out(ctx);
  out.header(x_columns(s.dim()));
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    std::vector<std::string> cells;
    append_point(cells, s.row(i));
    out.line(cells);
  }
  return kOk;
}

int cmd_point(Context& ctx, LossKind kind) {
  const Sample s = load_sample(ctx, "X1");
  const Index alpha = resolve_index(ctx, s.dim());
  const SolveReport r = geometric_measure(s, alpha, kind, ctx.solver());
  Output out(ctx);
  out.header(x_columns(s.dim()));
  std::vector<std::string> cells;
  append_point(cells, r.argmin);
  out.line(cells);
  out.note("converged", flag(r.converged));
  out.note("objective", num(r.objective));
  out.note("grad_norm", num(r.grad_norm));
  out.note("iterations", std::to_string(r.iterations));
  if (kind == LossKind::quantile) out.note("degenerate_possible", flag(r.degenerate_possible));
  return r.converged ? kOk : kNotConverged;
}

int cmd_curve(Context& ctx) {
  const Sample s = load_sample(ctx, "X1");
  const Curve c = trace_curve(s, resolve_path(ctx, s.dim()), resolve_measure(ctx), ctx.solver());
  Output out(ctx);
  write_curve(out, c, s.dim());
  return c.all_converged() ? kOk : kNotConverged;
}

int cmd_subadd(Context& ctx) {
  const Sample z = load_sample(ctx, "Z-clayton5");
  if (z.dim() != 4) throw ValidationError("subadd: needs a 4-column sample (X = columns 1,2; Y = columns 3,4)");
  if (ctx.opt.nphi < 1) throw ValidationError("--nphi must be >= 1");
  const auto res = subadditivity_sets(z.columns({0, 1}), z.columns({2, 3}), ctx.opt.r, resolve_measure(ctx),
                                      ctx.opt.nphi, ctx.solver());
  Output out(ctx);
  out.header({"param", "sum_x1", "sum_x2", "add_x1", "add_x2", "converged"});
  bool ok = true;
  for (std::size_t k = 0; k < res.curve_sum.size(); ++k) {
    const auto& a = res.curve_sum.points[k];
    const auto& b = res.curve_add.points[k];
    std::vector<std::string> cells{num(a.param)};
    append_point(cells, a.point);
    append_point(cells, b.point);
    cells.push_back(flag(a.converged && b.converged));
    ok = ok && a.converged && b.converged;
    out.line(cells);
  }
  out.note("included", flag(res.included.value_or(false)));
  return ok ? kOk : kNotConverged;
}

int cmd_compare(Context& ctx) {
  const Sample s = load_sample(ctx, "X1");
  const auto levels = to_doubles(ctx.opt.levels, "--levels");
  const auto rows = compare_univariate(s, levels, ctx.solver());
  Output out(ctx);
  out.header({"level", "univariate_var", "univariate_expectile", "geometric_var", "geometric_expectile", "converged"});
  bool ok = true;
  for (const auto& r : rows) {
    out.line({num(r.level), num(r.univariate_var), num(r.univariate_expectile), num(r.geometric_var),
              num(r.geometric_expectile), flag(r.converged)});
    ok = ok && r.converged;
  }
  return ok ? kOk : kNotConverged;
}

int cmd_match(Context& ctx) {
  const Sample s = load_sample(ctx, "X1");
  const Vector u = resolve_direction(ctx, s.dim(), 1.0);
  Output out(ctx);
  out.header({"theta", "m_star", "gap", "unimodal", "converged"});
  bool ok = true;
  for (double theta : to_doubles(ctx.opt.thetas, "--thetas")) {
    const auto m = match_magnitude(s, u, theta, ctx.solver());
    out.line({num(theta), num(m.m_star), num(m.gap), flag(m.unimodal), flag(m.converged)});
    ok = ok && m.converged;
  }
  return ok ? kOk : kNotConverged;
}

int cmd_marginalize(Context& ctx) {
  const Sample s = load_sample(ctx, "clayton5-3d");
  if (ctx.opt.nphi < 1) throw ValidationError("--nphi must be >= 1");
  const auto res = marginalization_curves(s, ctx.opt.r, ctx.opt.nphi, ctx.solver());
  Output out(ctx);
  out.header({"curve", "param", "x1", "x2", "converged"});
  bool ok = res.margin_curve.all_converged();
  auto emit = [&](const std::string& name, const Curve& c) {
    for (const auto& p : c.points) {
      std::vector<std::string> cells{name, num(p.param)};
      append_point(cells, p.point);
      cells.push_back(flag(p.converged));
      out.line(cells);
    }
  };
  emit("margin", res.margin_curve);
  for (int i = 0; i < 7; ++i) {
    emit("i" + std::to_string(i + 1), res.full_curves[static_cast<std::size_t>(i)]);
    ok = ok && res.full_curves[static_cast<std::size_t>(i)].all_converged();
  }
  for (int i = 0; i < 7; ++i)
    out.note("inclusion_i" + std::to_string(i + 1), flag(res.inclusion[static_cast<std::size_t>(i)]));
  return ok ? kOk : kNotConverged;
}

int cmd_distance(Context& ctx) {
  const Sample s = load_sample(ctx, "frank3-4d");
  const Vector u = resolve_direction(ctx, s.dim(), -1.0);
  const auto grid = magnitude_grid(ctx.opt.r_step, ctx.opt.r_max);
  const auto pts = distance_curve(s, u, grid, ctx.solver());
  Output out(ctx);
  out.header({"r", "distance", "converged"});
  bool ok = true;
  for (const auto& p : pts) {
    out.line({num(p.r), num(p.distance), flag(p.converged)});
    ok = ok && p.converged;
  }
  return ok ? kOk : kNotConverged;
}

int cmd_bounded(Context& ctx) {
  const Sample s = load_sample(ctx, "clayton5-unit");
  if (ctx.opt.nphi < 1) throw ValidationError("--nphi must be >= 1");
  const auto radii =
      ctx.opt.r_list.empty() ? default_bounded_support_radii() : to_doubles(ctx.opt.r_list, "--r-list");
  const auto rows = bounded_support_check(s, radii, ctx.opt.nphi, ctx.solver());
  Output out(ctx);
  out.header({"r", "exits_unit_square", "all_finite", "converged"});
  bool ok = true;
  for (const auto& r : rows) {
    out.line({num(r.r), flag(r.exits_unit_square), flag(r.all_finite), flag(r.converged)});
    ok = ok && r.converged;
  }
  return ok ? kOk : kNotConverged;
}

int cmd_uniform(Context& ctx) {
  const auto b = to_doubles(ctx.opt.box, "--box");
  if (b.size() != 4) throw ValidationError("--box: expected a1,b1,a2,b2");
  const analytic::UniformBox box{b[0], b[1], b[2], b[3]};
  box.validate();
  const SolverConfig cfg = ctx.solver();
  Output out(ctx);
  if (ctx.given("path")) {
    Curve curve;
    for (const auto& pp : path_points(resolve_path(ctx, 2), 2)) {
      const auto r = analytic::uniform_expectile(box, pp.index, cfg);
      curve.points.push_back({pp.param, r.argmin, r.converged});
    }
    write_curve(out, curve, 2);
    return curve.all_converged() ? kOk : kNotConverged;
  }
  const auto r = analytic::uniform_expectile(box, resolve_index(ctx, 2), cfg);
  out.header(x_columns(2));
  std::vector<std::string> cells;
  append_point(cells, r.argmin);
  out.line(cells);
  out.note("converged", flag(r.converged));
  out.note("objective", num(r.objective));
  return r.converged ? kOk : kNotConverged;
}

int cmd_selftest(Context& ctx) {
  int passed = 0;
  int failed = 0;
  std::ostream& o = *ctx.out;
  auto check = [&](const std::string& name, auto&& fn) {
    bool ok = false;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      o << "  error: " << e.what() << '\n';
    }
    o << (ok ? "PASS " : "FAIL ") << name << '\n';
    (ok ? passed : failed) += 1;
  };
  Rng rng = ctx.stage("selftest");
  Matrix raw(400, 2);
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    raw(i, 0) = margin_draw(Normal{0, 1}, rng);
    raw(i, 1) = margin_draw(StudentT{5}, rng);
  }
  const Sample s(raw);
  Vector a(2);
  a << 0.6, -0.3;
  const Index u(a);

  check("loss examples", [] {
    Vector t(2);
    t << 1, 0;
    Vector h(2);
    h << 0.5, 0;
    return std::abs(check_loss(0.9, -2) - 0.2) < 1e-15 && std::abs(lambda_loss(Index(h), t) - 0.75) < 1e-15;
  });
  check("loss nonnegativity and convexity", [&] {
    for (int k = 0; k < 2000; ++k) {
      Vector x(2);
      Vector y(2);
      x << rng.uniform() * 4 - 2, rng.uniform() * 4 - 2;
      y << rng.uniform() * 4 - 2, rng.uniform() * 4 - 2;
      if (lambda_loss(u, x) < 0 || phi_loss(u, x) < 0) return false;
      if (2 * lambda_loss(u, x) + 2 * lambda_loss(u, y) - lambda_loss(u, x + y) < -1e-10) return false;
    }
    return true;
  });
  check("zero index expectile is the mean", [&] {
    return (geometric_expectile(s, Index::zero(2)).argmin - s.mean()).norm() <= 1e-8;
  });
  check("one-dimensional reduction", [&] {
    const Sample c = s.columns({0});
    const Vector col = c.column(0);
    return std::abs(geometric_expectile(c, Index::scalar(0.4)).argmin[0] - univariate_expectile(col, 0.7)) <= 1e-6;
  });
  check("translation equivariance", [&] {
    Vector shift(2);
    shift << 3, -7;
    const Sample moved(s.rows().rowwise() + shift.transpose());
    return (geometric_expectile(moved, u).argmin - geometric_expectile(s, u).argmin - shift).norm() <= 1e-6;
  });
  check("vector sign symmetry", [&] {
    const Sample neg(-s.rows());
    return (geometric_expectile(neg, u).argmin + geometric_expectile(s, -u).argmin).norm() <= 1e-6;
  });
  check("analytic uniform centre", [] {
    Vector c(2);
    c << 0.5, 0.5;
    return std::abs(analytic::g(analytic::UniformBox{}, c) - 1.0 / 6.0) < 1e-12;
  });
  check("clayton kendall tau", [&] {
    Rng crng = ctx.stage("selftest-copula");
    const Matrix m = copula_sample(Clayton{5, 2}, 20000, crng);
    return std::abs(stats::kendall_tau(m.col(0), m.col(1)) - 5.0 / 7.0) < 0.02;
  });
  o << "selftest: " << passed << " passed, " << failed << " failed\n";
  return failed == 0 ? kOk : kValidationError;
}

// ---------------------------------------------------------------------------
// Config file: `key = value` lines, `#` comments. Keys are long option names.

std::vector<std::string> read_config(const std::string& path, const CLI::App& sub) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::vector<std::string> tokens;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ValidationError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ValidationError(where + "expected 'key = value'");
    if (key == "config" || sub.get_option_no_throw("--" + key) == nullptr) {
      throw ValidationError(where + "unknown key '" + key + "' for subcommand " + sub.get_name());
    }
    tokens.push_back("--" + key);
    tokens.push_back(value);
  }
  return tokens;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  Options& o = ctx.opt;

  CLI::App app{"Geometric expectiles and geometric VaR of multivariate samples", "gexp"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  struct Command {
    std::string name;
    std::string help;
    std::vector<std::string> groups;
  };
  const std::vector<Command> commands{
      {"simulate", "Draw a sample from a model and write it as CSV", {"model", "out"}},
      {"expectile", "Geometric expectile of a sample", {"model", "data", "out", "index", "solver"}},
      {"var", "Geometric VaR (geometric quantile) of a sample", {"model", "data", "out", "index", "solver"}},
      {"curve", "Trace a risk-measure curve over an index path", {"model", "data", "out", "path", "measure", "solver"}},
      {"subadd", "Multivariate subadditivity check on a 4-column sample", {"model", "data", "out", "radius", "nphi",
                                                                             "measure", "solver"}},
      {"compare-uni", "Univariate versus geometric measures on the first coordinate", {"model", "data", "out",
                                                                                         "levels", "solver"}},
      {"match-magnitude", "Magnitude m* matching geometric VaR to the geometric expectile", {"model", "data", "out",
                                                                                               "thetas", "direction",
                                                                                               "solver"}},
      {"marginalize", "Marginal versus full expectile curves for a 3-column sample", {"model", "data", "out",
                                                                                        "radius", "nphi", "solver"}},
      {"distance", "Distance of the expectile to the mean along a ray", {"model", "data", "out", "direction", "grid",
                                                                          "solver"}},
      {"bounded-support", "Does the expectile curve leave the unit square", {"model", "data", "out", "rlist", "nphi",
                                                                              "solver"}},
      {"uniform-analytic", "Closed-form expectile of the bivariate uniform", {"out", "index", "box", "path", "solver"}},
      {"selftest", "Run quick invariant checks", {"seed"}},
  };

  std::map<std::string, CLI::App*> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    subs[c.name] = sub;
    sub->add_option("--config", o.config, "key = value file; command-line flags override it");
    auto has = [&](const char* g) { return std::find(c.groups.begin(), c.groups.end(), g) != c.groups.end(); };
    if (has("model") || has("seed")) sub->add_option("--seed", o.seed, "Root seed");
    if (has("model")) {
      sub->add_option("--model", o.model, "Preset model name");
      sub->add_option("--margins", o.margins, "Inline margins, e.g. 'normal:0,1;t:4'");
      sub->add_option("--copula", o.copula, "independence | clayton:T | gumbel:T | frank:T");
      sub->add_option("--lambda", o.lambda, "Poisson rate; turns the inline model into a compound Poisson vector");
      sub->add_option("--n", o.n, "Sample size");
    }
    if (has("data")) sub->add_option("--data", o.data, "Headered CSV sample instead of simulating");
    if (has("out")) sub->add_option("--out", o.out, "Output file (default stdout)");
    if (has("index")) {
      sub->add_option("--alpha", o.alpha, "Index components, comma separated");
      sub->add_option("--level", o.level, "Confidence level mapped to 2 level - 1 along --direction");
      sub->add_option("--direction", o.direction, "Direction for --level (default first axis)");
    }
    if (has("path")) {
      sub->add_option("--path", o.path,
                      "circle:r | ellipse:r1,r2 | quarter:r | quarter-ellipse:r1,r2 | ray:u1,..,ud");
      sub->add_option("--nphi", o.nphi, "Points per planar path");
      sub->add_option("--r-step", o.r_step, "Magnitude step for ray paths");
      sub->add_option("--r-max", o.r_max, "Largest magnitude for ray paths");
    }
    if (has("nphi") && !has("path")) sub->add_option("--nphi", o.nphi, "Points per circle");
    if (has("measure")) sub->add_option("--measure", o.measure, "expectile | var");
    if (has("radius")) sub->add_option("--r", o.r, "Index radius");
    if (has("levels")) sub->add_option("--levels", o.levels, "Comma separated levels in (0,1)");
    if (has("thetas")) sub->add_option("--thetas", o.thetas, "Comma separated expectile magnitudes in [0,1)");
    if (has("direction") && !has("index")) sub->add_option("--direction", o.direction, "Direction (normalized)");
    if (has("grid")) {
      sub->add_option("--r-step", o.r_step, "Magnitude grid step");
      sub->add_option("--r-max", o.r_max, "Largest magnitude");
    }
    if (has("rlist")) sub->add_option("--r-list", o.r_list, "Comma separated radii");
    if (has("box")) sub->add_option("--box", o.box, "a1,b1,a2,b2");
    if (has("solver")) {
      sub->add_option("--tol", o.tol, "Relative gradient tolerance");
      sub->add_option("--max-iter", o.max_iter, "Iteration cap per solve");
    }
  }

  try {
    // Splice config-file entries in front of the command-line flags so that
    // the latter win under the take-last policy.
    std::vector<std::string> tokens = args;
    std::optional<std::string> config_path;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      if (tokens[k] == "--config" && k + 1 < tokens.size()) {
        config_path = tokens[k + 1];
        tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(k), tokens.begin() + static_cast<std::ptrdiff_t>(k + 2));
        break;
      }
      if (tokens[k].rfind("--config=", 0) == 0) {
        config_path = tokens[k].substr(9);
        tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(k));
        break;
      }
    }
    if (config_path) {
      const auto it = std::find_if(tokens.begin(), tokens.end(), [&](const std::string& t) { return subs.count(t); });
      if (it == tokens.end()) throw ValidationError("--config needs a subcommand");
      const auto extra = read_config(*config_path, *subs[*it]);
      tokens.insert(it + 1, extra.begin(), extra.end());
    }
    std::reverse(tokens.begin(), tokens.end());
    app.parse(tokens);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    ctx.sub = sub;
    try {
      if (name == "simulate") return cmd_simulate(ctx);
      if (name == "expectile") return cmd_point(ctx, LossKind::expectile);
      if (name == "var") return cmd_point(ctx, LossKind::quantile);
      if (name == "curve") return cmd_curve(ctx);
      if (name == "subadd") return cmd_subadd(ctx);
      if (name == "compare-uni") return cmd_compare(ctx);
      if (name == "match-magnitude") return cmd_match(ctx);
      if (name == "marginalize") return cmd_marginalize(ctx);
      if (name == "distance") return cmd_distance(ctx);
      if (name == "bounded-support") return cmd_bounded(ctx);
      if (name == "uniform-analytic") return cmd_uniform(ctx);
      if (name == "selftest") return cmd_selftest(ctx);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kValidationError;
    }
  }
  err << "error: no subcommand\n";
  return kValidationError;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace gexp::cli
