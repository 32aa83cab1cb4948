#include "tbspec/config.hpp"
#include "tbspec/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

namespace tbspec {

namespace {

std::string trim(const std::string& s)
{
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double to_double(const std::string& s)
{
  std::string t = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v))
    throw DomainError("not a finite number: '" + t + "'");
  return v;
}

int to_int(const std::string& s)
{
  std::string t = trim(s);
  int v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw DomainError("not an integer: '" + t + "'");
  return v;
}

bool to_bool(const std::string& s)
{
  std::string t = lower(trim(s));
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  throw DomainError("not a boolean: '" + t + "'");
}

std::vector<double> to_list(const std::string& s)
{
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(to_double(item));
  }
  return out;
}

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string list(const std::vector<double>& v)
{
  std::string out;
  for (size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + num(v[k]);
  return out;
}

Parity to_parity(const std::string& s)
{
  std::string t = lower(trim(s));
  if (t == "even") return Parity::Even;
  if (t == "odd") return Parity::Odd;
  throw DomainError("parity must be 'even' or 'odd', got '" + t + "'");
}

const std::vector<std::string> kUVars{"p1", "p2", "p3", "q1", "q2", "q3"};
const std::vector<std::string> kPhiVars{"p1", "p2", "p3"};

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

std::map<std::string, Setter> make_setters()
{
  std::map<std::string, Setter> m;
  m["model.name"] = [](ExperimentConfig& c, const std::string& v) {
    std::string t = lower(trim(v));
    if (t != "reference-cos" && t != "reference-sin" && t != "expression")
      throw DomainError("unknown model '" + t + "' (reference-cos, reference-sin, expression)");
    c.model = t;
  };
  m["model.u"] = [](ExperimentConfig& c, const std::string& v) {
    Expr::parse(v, kUVars);
    c.dispersion = trim(v);
  };
  for (int a = 0; a < 2; ++a) {
    const std::string p = "model.phi" + std::to_string(a + 1);
    m[p] = [a](ExperimentConfig& c, const std::string& v) {
      Expr::parse(v, kPhiVars);
      c.phi[a].expression = trim(v);
    };
    m[p + ".parity"] = [a](ExperimentConfig& c, const std::string& v) { c.phi[a].parity = to_parity(v); };
    for (int i = 0; i < 4; ++i)
      m[p + ".a" + std::to_string(i)] = [a, i](ExperimentConfig& c, const std::string& v) {
        c.phi[a].cos[i] = to_double(v);
      };
    m[p + ".a"] = [a](ExperimentConfig& c, const std::string& v) { c.phi[a].sin_amplitude = to_double(v); };
  }
  m["couplings.mu1"] = [](ExperimentConfig& c, const std::string& v) { c.mu1 = CouplingSpec::parse(v); };
  m["couplings.mu2"] = [](ExperimentConfig& c, const std::string& v) { c.mu2 = CouplingSpec::parse(v); };

  auto grid = [](int ExperimentConfig::*field, int min, bool even) {
    return [field, min, even](ExperimentConfig& c, const std::string& v) {
      int n = to_int(v);
      if (n < min) throw DomainError("must be at least " + std::to_string(min));
      if (even && n % 2) throw DomainError("must be even");
      c.*field = n;
    };
  };
  m["grids.quad_n"] = grid(&ExperimentConfig::quad_n, 8, true);
  m["grids.scan_n"] = grid(&ExperimentConfig::scan_n, 4, false);
  m["grids.kernel_n"] = grid(&ExperimentConfig::kernel_n, 2, false);
  m["grids.branch_n"] = grid(&ExperimentConfig::branch_n, 8, false);
  m["grids.hypothesis_n"] = grid(&ExperimentConfig::hypothesis_n, 8, false);
  m["grids.mu_max_n"] = grid(&ExperimentConfig::mu_max_n, 8, false);
  m["grids.sr_nodes_per_unit"] = [](ExperimentConfig& c, const std::string& v) {
    double d = to_double(v);
    if (!(d > 0.0)) throw DomainError("must be positive");
    c.sr_nodes_per_unit = d;
  };

  m["schedule.z"] = [](ExperimentConfig& c, const std::string& v) { c.z = to_list(v); };
  m["schedule.z_range"] = [](ExperimentConfig& c, const std::string& v) {
    std::vector<double> x = to_list(v);
    if (x.size() != 3) throw DomainError("z_range takes start, stop, count");
    GeometricRange g{x[0], x[1], static_cast<int>(x[2])};
    if (g.count != x[2] || g.count < 1) throw DomainError("z_range count must be a positive integer");
    if (!(g.start < 0.0) || !(g.stop < 0.0)) throw DomainError("z_range endpoints must be negative");
    c.z_range = g;
  };
  m["schedule.r"] = [](ExperimentConfig& c, const std::string& v) {
    c.r = to_list(v);
    for (double r : c.r)
      if (!(r > 0.0)) throw DomainError("r values must be positive");
  };

  m["efimov.l_max"] = grid(&ExperimentConfig::l_max, 0, false);
  m["efimov.legendre_n"] = grid(&ExperimentConfig::legendre_n, 32, false);
  m["efimov.y_min"] = [](ExperimentConfig& c, const std::string& v) { c.y_min = to_double(v); };
  m["efimov.y_max"] = [](ExperimentConfig& c, const std::string& v) { c.y_max = to_double(v); };
  m["efimov.y_step"] = [](ExperimentConfig& c, const std::string& v) {
    double d = to_double(v);
    if (!(d > 0.0)) throw DomainError("must be positive");
    c.y_step = d;
  };
  m["efimov.fit_counts"] = [](ExperimentConfig& c, const std::string& v) { c.fit_counts = to_bool(v); };

  m["output.dir"] = [](ExperimentConfig& c, const std::string& v) {
    if (trim(v).empty()) throw DomainError("empty output directory");
    c.out_dir = trim(v);
  };
  m["output.format"] = [](ExperimentConfig& c, const std::string& v) {
    std::string t = lower(trim(v));
    if (t != "csv" && t != "json") throw DomainError("format must be 'csv' or 'json'");
    c.format = t;
  };
  return m;
}

// Whole-config consistency; returns messages.
std::vector<std::string> validate(const ExperimentConfig& c)
{
  std::vector<std::string> out;
  if (c.model == "expression") {
    if (c.dispersion.empty()) out.push_back("expression model requires model.u");
    for (int a = 0; a < 2; ++a)
      if (c.phi[a].expression.empty()) out.push_back("expression model requires model.phi" + std::to_string(a + 1));
  } else {
    if (!c.dispersion.empty() || !c.phi[0].expression.empty() || !c.phi[1].expression.empty())
      out.push_back("expressions are only allowed with model.name = expression");
  }
  if (!(c.y_max > c.y_min)) out.push_back("efimov.y_max must exceed efimov.y_min");
  if (out.empty()) {
    try {
      build_model(c);
    } catch (const std::exception& e) {
      out.push_back(e.what());
    }
  }
  return out;
}

}  // namespace

CouplingSpec CouplingSpec::parse(const std::string& text)
{
  std::string t = lower(trim(text));
  t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char ch) { return std::isspace(ch); }), t.end());
  CouplingSpec c;
  auto token = [&](const std::string& s) -> std::optional<Kind> {
    if (s == "mu0") return Kind::Mu0;
    if (s == "mu_max") return Kind::MuMax;
    return std::nullopt;
  };
  if (auto k = token(t)) {
    c.kind = *k;
    c.factor = 1.0;
    return c;
  }
  size_t star = t.find('*');
  if (star != std::string::npos) {
    std::string a = t.substr(0, star), b = t.substr(star + 1);
    if (auto k = token(b)) {
      c.kind = *k;
      c.factor = to_double(a);
    } else if (auto k2 = token(a)) {
      c.kind = *k2;
      c.factor = to_double(b);
    } else {
      throw DomainError("coupling must be a number, mu0, mu_max or k*mu0 / k*mu_max: '" + t + "'");
    }
    if (!(c.factor > 0.0)) throw DomainError("coupling factor must be positive");
    return c;
  }
  c.kind = Kind::Value;
  c.factor = to_double(t);
  if (!(c.factor > 0.0)) throw DomainError("coupling must be positive");
  return c;
}

std::string CouplingSpec::str() const
{
  switch (kind) {
    case Kind::Value: return num(factor);
    case Kind::Mu0: return factor == 1.0 ? "mu0" : num(factor) + "*mu0";
    case Kind::MuMax: return factor == 1.0 ? "mu_max" : num(factor) + "*mu_max";
  }
  return "";
}

std::vector<double> ExperimentConfig::z_values() const
{
  std::vector<double> out = z;
  if (z_range) {
    const auto& g = *z_range;
    if (g.count == 1) {
      out.push_back(g.start);
    } else {
      const double l0 = std::log(-g.start), l1 = std::log(-g.stop);
      for (int k = 0; k < g.count; ++k) out.push_back(-std::exp(l0 + (l1 - l0) * k / (g.count - 1)));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

EfimovOptions ExperimentConfig::efimov_options() const
{
  EfimovOptions o;
  o.u.grid = YGrid{y_min, y_max, y_step};
  o.u.l_max = l_max;
  o.u.quad_n = legendre_n;
  o.r_schedule = r;
  o.nodes_per_unit = sr_nodes_per_unit;
  return o;
}

ParseResult parse_config(const std::string& text)
{
  static const std::map<std::string, Setter> setters = make_setters();
  static const std::vector<std::string> sections{"model", "couplings", "grids", "schedule", "efimov", "output"};
  ParseResult res;
  ExperimentConfig cfg;
  std::string section;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        res.diagnostics.push_back({lineno, "malformed section header"});
        continue;
      }
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (std::find(sections.begin(), sections.end(), section) == sections.end()) {
        res.diagnostics.push_back({lineno, "unknown section [" + section + "]"});
        section = "?";
      }
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      res.diagnostics.push_back({lineno, "expected key = value"});
      continue;
    }
    std::string key = lower(trim(line.substr(0, eq)));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      res.diagnostics.push_back({lineno, "key '" + key + "' outside of a section"});
      continue;
    }
    if (section == "?") continue;
    std::string full = section + "." + key;
    auto it = setters.find(full);
    if (it == setters.end()) {
      res.diagnostics.push_back({lineno, "unknown key '" + key + "' in [" + section + "]"});
      continue;
    }
    if (seen.count(full)) {
      res.diagnostics.push_back({lineno, "duplicate key '" + key + "' (first set on line " +
                                             std::to_string(seen[full]) + ")"});
      continue;
    }
    seen[full] = lineno;
    try {
      it->second(cfg, value);
    } catch (const std::exception& e) {
      res.diagnostics.push_back({lineno, key + ": " + e.what()});
    }
  }
  if (!res.diagnostics.empty()) return res;
  for (const std::string& msg : validate(cfg)) {
    // attribute form-factor problems to the line that declared them
    int line = 0;
    for (int a = 0; a < 2; ++a) {
      std::string k = "model.phi" + std::to_string(a + 1);
      if (msg.find("phi" + std::to_string(a + 1)) != std::string::npos && seen.count(k)) line = seen[k];
    }
    if (msg.find("dispersion") != std::string::npos && seen.count("model.u")) line = seen["model.u"];
    res.diagnostics.push_back({line, msg});
  }
  if (res.diagnostics.empty()) res.config = cfg;
  return res;
}

std::string serialize_config(const ExperimentConfig& c)
{
  std::ostringstream os;
  os << "[model]\nname = " << c.model << "\n";
  if (c.model == "expression") {
    os << "u = " << c.dispersion << "\n";
    for (int a = 0; a < 2; ++a)
      os << "phi" << a + 1 << " = " << c.phi[a].expression << "\nphi" << a + 1
         << ".parity = " << (c.phi[a].parity == Parity::Even ? "even" : "odd") << "\n";
  }
  for (int a = 0; a < 2; ++a) {
    for (int i = 0; i < 4; ++i) os << "phi" << a + 1 << ".a" << i << " = " << num(c.phi[a].cos[i]) << "\n";
    os << "phi" << a + 1 << ".a = " << num(c.phi[a].sin_amplitude) << "\n";
  }
  os << "\n[couplings]\nmu1 = " << c.mu1.str() << "\nmu2 = " << c.mu2.str() << "\n";
  os << "\n[grids]\nquad_n = " << c.quad_n << "\nscan_n = " << c.scan_n << "\nkernel_n = " << c.kernel_n
     << "\nbranch_n = " << c.branch_n << "\nhypothesis_n = " << c.hypothesis_n << "\nmu_max_n = " << c.mu_max_n
     << "\nsr_nodes_per_unit = " << num(c.sr_nodes_per_unit) << "\n";
  os << "\n[schedule]\n";
  if (!c.z.empty()) os << "z = " << list(c.z) << "\n";
  if (c.z_range) os << "z_range = " << num(c.z_range->start) << ", " << num(c.z_range->stop) << ", " << c.z_range->count << "\n";
  os << "r = " << list(c.r) << "\n";
  os << "\n[efimov]\nl_max = " << c.l_max << "\nlegendre_n = " << c.legendre_n << "\ny_min = " << num(c.y_min)
     << "\ny_max = " << num(c.y_max) << "\ny_step = " << num(c.y_step)
     << "\nfit_counts = " << (c.fit_counts ? "true" : "false") << "\n";
  os << "\n[output]\ndir = " << c.out_dir << "\nformat = " << c.format << "\n";
  return os.str();
}

ModelSpec build_model(const ExperimentConfig& c)
{
  if (c.model == "reference-cos") {
    CosForm f1{c.phi[0].cos[0], c.phi[0].cos[1], c.phi[0].cos[2], c.phi[0].cos[3]};
    CosForm f2{c.phi[1].cos[0], c.phi[1].cos[1], c.phi[1].cos[2], c.phi[1].cos[3]};
    return make_reference_model(f1, f2, 1.0, 1.0);
  }
  if (c.model == "reference-sin")
    return make_reference_model(SinForm{c.phi[0].sin_amplitude}, SinForm{c.phi[1].sin_amplitude}, 1.0, 1.0);
  if (c.model != "expression") throw DomainError("unknown model '" + c.model + "'");

  ModelSpec m;
  m.name = "expression";
  Expr u = Expr::parse(c.dispersion, kUVars);
  m.dispersion = [u](const Vec3& p, const Vec3& q) {
    const double v[6] = {p[0], p[1], p[2], q[0], q[1], q[2]};
    return u(v);
  };
  // evenness of u, sampled
  {
    UniformGrid g(6);
    double worst = 0.0, scale = 0.0;
    for (long i = 0; i < g.size(); i += 7)
      for (long j = 0; j < g.size(); j += 5) {
        Vec3 p = g.node(i) + Vec3(0.1, 0.2, 0.3), q = g.node(j) + Vec3(-0.3, 0.05, 0.2);
        double a = m.dispersion(p, q), b = m.dispersion(-p, -q);
        worst = std::max(worst, std::abs(a - b));
        scale = std::max(scale, std::abs(a));
      }
    if (worst > 1e-12 * std::max(1.0, scale)) throw DomainError("dispersion u is not even: u(-p,-q) != u(p,q)");
  }
  for (int a = 0; a < 2; ++a) {
    Expr e = Expr::parse(c.phi[a].expression, kPhiVars);
    PointFn f = [e](const Vec3& p) {
      const double v[3] = {p[0], p[1], p[2]};
      return e(v);
    };
    if (parity_violation(f, c.phi[a].parity) > 1e-12)
      throw DomainError("phi" + std::to_string(a + 1) + " '" + c.phi[a].expression + "' is not " +
                        (c.phi[a].parity == Parity::Even ? "even" : "odd"));
    FormFactor ff(f, c.phi[a].parity);
    (a == 0 ? m.phi1 : m.phi2) = ff;
  }
  m.mu1 = m.mu2 = 1.0;
  return m;
}

ResolvedCouplings resolve_couplings(const ExperimentConfig& cfg, const ModelSpec& unit_model)
{
  ResolvedCouplings r;
  const FiberOptions fo = cfg.fiber_options();
  for (Channel a : {Channel::One, Channel::Two}) {
    const CouplingSpec& cs = a == Channel::One ? cfg.mu1 : cfg.mu2;
    double v = cs.factor;
    if (cs.kind == CouplingSpec::Kind::Mu0) {
      double m0 = mu_zero(unit_model, a, fo);
      (a == Channel::One ? r.mu0_1 : r.mu0_2) = m0;
      v = cs.factor * m0;
    } else if (cs.kind == CouplingSpec::Kind::MuMax) {
      double mm = mu_max(unit_model, a, cfg.mu_max_n, fo);
      (a == Channel::One ? r.mu_max_1 : r.mu_max_2) = mm;
      v = cs.factor * mm;
    }
    (a == Channel::One ? r.mu1 : r.mu2) = v;
  }
  return r;
}

}  // namespace tbspec
