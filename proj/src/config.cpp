#include "ffsr/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>

namespace ffsr {

namespace {

std::string format_error(const std::string& field, int line, const std::string& message) {
  std::string out = field.empty() ? "config" : field;
  if (line > 0) out += " (line " + std::to_string(line) + ")";
  return out + ": " + message;
}

}  // namespace

ConfigError::ConfigError(const std::string& f, int l, const std::string& message)
    : std::runtime_error(format_error(f, l, message)), field(f), line(l) {}

double unit_factor(const std::string& unit, const std::string& kind) {
  static const std::map<std::string, std::map<std::string, double>> table = {
      {"length", {{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}}},
      {"angle", {{"rad", 1.0}, {"deg", M_PI / 180.0}}},
      {"time", {{"s", 1.0}, {"ms", 1e-3}}},
      {"mass", {{"kg", 1.0}}},
      {"inertia", {{"kg m^2", 1.0}}},
      {"rate", {{"1/s", 1.0}}},
      {"angular_rate", {{"rad/s", 1.0}, {"deg/s", M_PI / 180.0}}},
      {"linear_momentum", {{"N s", 1.0}, {"kg m/s", 1.0}}},
      {"angular_momentum", {{"N m s", 1.0}, {"kg m^2/s", 1.0}}},
  };
  const auto k = table.find(kind);
  if (k == table.end()) throw std::invalid_argument("unknown quantity kind '" + kind + "'");
  const auto u = k->second.find(unit);
  if (u == k->second.end()) {
    std::string allowed;
    for (const auto& [name, factor] : k->second) allowed += (allowed.empty() ? "" : ", ") + name;
    throw std::invalid_argument("unit '" + unit + "' is not a " + kind + " unit (expected " +
                                allowed + ")");
  }
  return u->second;
}

namespace {

std::string collapse_spaces(const std::string& s) {
  std::istringstream in(s);
  std::string word, out;
  while (in >> word) out += (out.empty() ? "" : " ") + word;
  return out;
}

double parse_number(const std::string& token) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || token.empty())
    throw std::invalid_argument("'" + token + "' is not a number");
  return v;
}

}  // namespace

double parse_quantity(const std::string& text, const std::string& kind) {
  const std::string s = collapse_spaces(text);
  const auto space = s.find(' ');
  if (space == std::string::npos)
    throw std::invalid_argument("'" + text + "' has no unit (write it as '<number> <unit>')");
  return parse_number(s.substr(0, space)) * unit_factor(s.substr(space + 1), kind);
}

namespace {

int line_of(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  return m.line >= 0 ? m.line + 1 : 0;
}

// A YAML node together with its dotted path, for error messages.
class Field {
 public:
  Field(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  int line() const { return line_of(node_); }
  [[noreturn]] void fail(const std::string& message) const {
    throw ConfigError(path_, line(), message);
  }

  bool has(const std::string& key) const { return node_.IsMap() && node_[key]; }

  Field at(const std::string& key) const {
    if (!node_.IsMap()) fail("expected a mapping");
    const YAML::Node child = node_[key];
    if (!child) throw ConfigError(join(key), line(), "missing required field");
    return Field(child, join(key));
  }

  std::optional<Field> find(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return at(key);
  }

  Field item(std::size_t i) const {
    return Field(node_[i], path_ + "[" + std::to_string(i) + "]");
  }

  std::size_t size() const {
    if (!node_.IsSequence()) fail("expected a list");
    return node_.size();
  }

  void only(std::initializer_list<const char*> keys) const {
    if (!node_.IsMap()) fail("expected a mapping");
    for (const auto& kv : node_) {
      const std::string k = kv.first.as<std::string>();
      bool known = false;
      for (const char* allowed : keys) known = known || k == allowed;
      if (!known) throw ConfigError(join(k), line_of(kv.first), "unknown field");
    }
  }

  std::string text() const {
    if (!node_.IsScalar()) fail("expected a scalar value");
    return node_.Scalar();
  }

  double number() const {
    try {
      return parse_number(text());
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  std::uint64_t unsigned_integer() const {
    const std::string s = text();
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
      fail("'" + s + "' is not a non-negative integer");
    return v;
  }

  double quantity(const std::string& kind) const {
    try {
      return parse_quantity(text(), kind);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  std::vector<double> numbers(std::size_t n) const {
    if (node_.size() != n || !node_.IsSequence())
      fail("expected a list of " + std::to_string(n) + " numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(item(i).number());
    return out;
  }

  // {<unit>: [values...]}
  std::vector<double> quantities(std::size_t n, const std::string& kind) const {
    if (!node_.IsMap() || node_.size() != 1)
      fail("expected a one-key map from the unit to the values, e.g. {m: [0, 0, 0]}");
    const auto kv = *node_.begin();
    const std::string unit = collapse_spaces(kv.first.as<std::string>());
    double factor = 1.0;
    try {
      factor = unit_factor(unit, kind);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    std::vector<double> v = Field(kv.second, path_).numbers(n);
    for (double& x : v) x *= factor;
    return v;
  }

  Vector3d vec3(const std::string& kind) const {
    const auto v = quantities(3, kind);
    return Vector3d(v[0], v[1], v[2]);
  }

  Vector3d direction() const {
    const auto v = numbers(3);
    return Vector3d(v[0], v[1], v[2]);
  }

  Vector6d vec6(const std::string& kind) const {
    const auto v = quantities(6, kind);
    return Eigen::Map<const Vector6d>(v.data());
  }

  Matrix3d mat3(const std::string& kind) const {
    if (!node_.IsMap() || node_.size() != 1)
      fail("expected a one-key map from the unit to three rows");
    const auto kv = *node_.begin();
    const std::string unit = collapse_spaces(kv.first.as<std::string>());
    double factor = 1.0;
    try {
      factor = unit_factor(unit, kind);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    const Field rows(kv.second, path_);
    if (rows.size() != 3) fail("expected three rows");
    Matrix3d M;
    for (int r = 0; r < 3; ++r) {
      const auto row = rows.item(r).numbers(3);
      for (int c = 0; c < 3; ++c) M(r, c) = factor * row[c];
    }
    return M;
  }

  UnitQuaterniond quaternion() const {
    const auto v = numbers(4);
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
    if (!(std::abs(n - 1.0) < 1e-3))
      fail("quaternion (w, x, y, z) must have unit norm, got norm " + std::to_string(n));
    return UnitQuaterniond(v[0], v[1], v[2], v[3]);
  }

 private:
  std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  YAML::Node node_;
  std::string path_;
};

Posed parse_pose(const Field& f) {
  f.only({"position", "attitude"});
  Posed p;
  p.position = f.at("position").vec3("length");
  p.attitude = f.at("attitude").quaternion();
  return p;
}

ArmModel parse_arm(const Field& f) {
  f.only({"mount", "tool", "links"});
  ArmModel arm;
  arm.mount = parse_pose(f.at("mount"));
  arm.tool = f.at("tool").quaternion();
  const Field links = f.at("links");
  if (links.size() != kArmJoints) links.fail("expected " + std::to_string(kArmJoints) + " links");
  for (int i = 0; i < kArmJoints; ++i) {
    const Field l = links.item(i);
    l.only({"axis", "offset", "mass", "inertia"});
    LinkParam& p = arm.links[i];
    p.axis = l.at("axis").direction();
    if (!(std::abs(p.axis.norm() - 1.0) < 1e-6)) l.at("axis").fail("joint axis must be a unit vector");
    p.offset = l.at("offset").vec3("length");
    p.mass = l.at("mass").quantity("mass");
    p.inertia = l.at("inertia").mat3("inertia");
  }
  return arm;
}

RobotModel parse_robot(const Field& f) {
  f.only({"base", "arms"});
  RobotModel robot;
  const Field base = f.at("base");
  base.only({"mass", "inertia"});
  robot.base_mass = base.at("mass").quantity("mass");
  robot.base_inertia = base.at("inertia").mat3("inertia");
  const Field arms = f.at("arms");
  if (arms.size() != 2) arms.fail("expected two arms (mission arm first)");
  robot.arms[0] = parse_arm(arms.item(0));
  robot.arms[1] = parse_arm(arms.item(1));
  return robot;
}

FeedbackMode parse_feedback(const Field& f) {
  const std::string s = f.text();
  if (s == "none") return FeedbackMode::none;
  if (s == "proportional") return FeedbackMode::proportional;
  if (s == "predefined_time") return FeedbackMode::predefined_time;
  f.fail("unknown feedback mode '" + s + "' (expected none, proportional or predefined_time)");
}

PhiForm parse_phi_form(const Field& f) {
  const std::string s = f.text();
  if (s == "canonical") return PhiForm::canonical;
  if (s == "paper_literal") return PhiForm::paper_literal;
  f.fail("unknown phi form '" + s + "' (expected canonical or paper_literal)");
}

void parse_planner(const Field& f, PlannerParams& p) {
  f.only({"m", "T_c", "feedback", "k_p", "phi_form", "deadband", "damping"});
  if (auto x = f.find("m")) p.m = x->number();
  if (auto x = f.find("T_c")) p.T_c = x->quantity("time");
  if (auto x = f.find("feedback")) p.feedback_mode = parse_feedback(*x);
  if (auto x = f.find("k_p")) p.k_p = x->quantity("rate");
  if (auto x = f.find("phi_form")) p.phi_form = parse_phi_form(*x);
  if (auto x = f.find("deadband")) p.deadband = x->number();
  if (auto d = f.find("damping")) {
    d->only({"epsilon", "lambda_max"});
    if (auto x = d->find("epsilon")) p.damping.eps = x->number();
    if (auto x = d->find("lambda_max")) p.damping.lambda_max = x->number();
  }
}

void parse_cdf(const Field& f, CdfParams& c) {
  f.only({"xi", "delta", "mu", "escape_gain"});
  if (auto x = f.find("xi")) c.xi = x->number();
  if (auto x = f.find("delta")) c.delta = x->number();
  if (auto x = f.find("mu")) c.mu = x->number();
  if (auto x = f.find("escape_gain")) c.escape_gain = x->number();
}

void parse_ga(const Field& f, OptimizeSettings& o) {
  f.only({"population", "generations", "crossover_probability", "mutation_probability", "alpha",
          "beta", "gamma", "danger_speed", "max_speed", "seed", "bounds", "frozen_T_c", "threads",
          "baseline"});
  GaConfig& g = o.ga;
  if (auto x = f.find("population")) g.population = x->unsigned_integer();
  if (auto x = f.find("generations")) g.generations = x->unsigned_integer();
  if (auto x = f.find("crossover_probability")) g.P_c = x->number();
  if (auto x = f.find("mutation_probability")) g.P_m = x->number();
  if (auto x = f.find("alpha")) g.alpha = x->number();
  if (auto x = f.find("beta")) g.beta = x->number();
  if (auto x = f.find("gamma")) g.gamma = x->number();
  if (auto x = f.find("danger_speed")) g.danger_speed = x->quantity("angular_rate");
  if (auto x = f.find("max_speed")) g.max_speed = x->quantity("angular_rate");
  if (auto x = f.find("seed")) g.seed = x->unsigned_integer();
  if (auto x = f.find("threads")) g.threads = static_cast<unsigned>(x->unsigned_integer());
  if (auto x = f.find("frozen_T_c")) g.frozen_Tc = x->quantity("time");
  if (auto b = f.find("bounds")) {
    b->only({"m", "T_c"});
    if (auto x = b->find("m")) {
      const auto v = x->numbers(2);
      g.bounds.m_min = v[0];
      g.bounds.m_max = v[1];
    }
    if (auto x = b->find("T_c")) {
      const auto v = x->quantities(2, "time");
      g.bounds.Tc_min = v[0];
      g.bounds.Tc_max = v[1];
    }
  }
  if (auto b = f.find("baseline")) {
    b->only({"m", "T_c"});
    if (auto x = b->find("m")) o.baseline_m = x->number();
    if (auto x = b->find("T_c")) o.baseline_Tc = x->quantity("time");
  }
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    f.fail(e.what());
  }
}

Method parse_method_field(const Field& f) {
  try {
    return parse_method(f.text());
  } catch (const std::invalid_argument& e) {
    f.fail(e.what());
  }
}

ScenarioConfig parse_root(const YAML::Node& root) {
  const Field f(root, "");
  if (!root.IsMap()) throw ConfigError("", line_of(root), "top level must be a mapping");
  f.only({"name", "simulation", "robot", "initial", "target", "trajectory", "obstacle", "planner",
          "cdf", "ga"});
  ScenarioConfig cfg;
  Scenario& sc = cfg.scenario;
  if (auto x = f.find("name")) sc.name = x->text();

  if (auto s = f.find("simulation")) {
    s->only({"total_time", "dt", "method"});
    if (auto x = s->find("total_time")) sc.total_time = x->quantity("time");
    if (auto x = s->find("dt")) sc.dt = x->quantity("time");
    if (auto x = s->find("method")) sc.method = parse_method_field(*x);
  }

  sc.robot = parse_robot(f.at("robot"));

  const Field init = f.at("initial");
  init.only({"base", "theta1", "theta2", "momentum"});
  sc.initial.base = parse_pose(init.at("base"));
  sc.initial.theta1 = init.at("theta1").vec6("angle");
  sc.initial.theta2 = init.at("theta2").vec6("angle");
  if (auto m = init.find("momentum")) {
    m->only({"linear", "angular"});
    if (auto x = m->find("linear")) sc.momentum.head<3>() = x->vec3("linear_momentum");
    if (auto x = m->find("angular")) sc.momentum.tail<3>() = x->vec3("angular_momentum");
  }

  sc.target = parse_pose(f.at("target"));

  if (auto t = f.find("trajectory")) {
    t->only({"ramp_time", "start"});
    if (auto x = t->find("ramp_time")) sc.ramp_time = x->quantity("time");
    if (auto x = t->find("start")) sc.trajectory_start = parse_pose(*x);
  }

  if (auto o = f.find("obstacle")) {
    o->only({"center", "danger_radius"});
    Obstacle ob;
    ob.center = o->at("center").vec3("length");
    ob.danger_radius = o->at("danger_radius").quantity("length");
    sc.obstacle = ob;
  }

  if (auto p = f.find("planner")) parse_planner(*p, sc.planner);
  if (auto c = f.find("cdf")) parse_cdf(*c, sc.cdf);
  if (auto g = f.find("ga")) parse_ga(*g, cfg.optimize);

  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("scenario", 0, e.what());
  }
  return cfg;
}

YAML::Node load_yaml(const std::string& text, const std::string& source) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(source, e.mark.line + 1, e.msg);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

ScenarioConfig parse_config(const std::string& yaml_text, const std::string& source) {
  return parse_root(load_yaml(yaml_text, source));
}

ScenarioConfig load_config(const std::string& path) {
  return parse_config(read_file(path), path);
}

OptimizeSettings load_optimize_settings(const std::string& path, OptimizeSettings defaults) {
  const YAML::Node root = load_yaml(read_file(path), path);
  const Field f(root, "");
  if (!root.IsMap()) throw ConfigError("", line_of(root), "top level must be a mapping");
  f.only({"ga"});
  parse_ga(f.at("ga"), defaults);
  return defaults;
}

}  // namespace ffsr
