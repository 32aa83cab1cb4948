#include "tbspec/cli.hpp"
#include "tbspec/birman_schwinger.hpp"
#include "tbspec/efimov.hpp"
#include "tbspec/errors.hpp"
#include "tbspec/essential_spectrum.hpp"
#include "tbspec/hypotheses.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tbspec {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}


json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Cells are preformatted strings; JSON output re-reads numeric cells.
struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

class Output {
 public:
  Output(fs::path dir, std::string format) : dir_(std::move(dir)), format_(std::move(format))
  {
    fs::create_directories(dir_);
  }

  void write(const Table& t)
  {
    if (format_ == "json") {
      json arr = json::array();
      for (const auto& r : t.rows) {
        json o;
        for (size_t k = 0; k < t.header.size(); ++k) {
          const std::string& cell = r[k];
          char* end = nullptr;
          double v = std::strtod(cell.c_str(), &end);
          if (!cell.empty() && end == cell.c_str() + cell.size())
            o[t.header[k]] = v;
          else
            o[t.header[k]] = cell;
        }
        arr.push_back(o);
      }
      std::ofstream(dir_ / (t.name + ".json")) << arr.dump(2) << "\n";
      files_.push_back(t.name + ".json");
    } else {
      std::ofstream f(dir_ / (t.name + ".csv"));
      for (size_t k = 0; k < t.header.size(); ++k) f << (k ? "," : "") << t.header[k];
      f << "\n";
      for (const auto& r : t.rows) {
        for (size_t k = 0; k < r.size(); ++k) f << (k ? "," : "") << r[k];
        f << "\n";
      }
      files_.push_back(t.name + ".csv");
    }
  }

  void summary(const json& j) const { std::ofstream(dir_ / "summary.json") << j.dump(2) << "\n"; }
  const std::vector<std::string>& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::string format_;
  std::vector<std::string> files_;
};

json grids_json(const ExperimentConfig& c)
{
  return json{{"quad_n", c.quad_n},
              {"scan_n", c.scan_n},
              {"kernel_n", c.kernel_n},
              {"branch_n", c.branch_n},
              {"hypothesis_n", c.hypothesis_n},
              {"mu_max_n", c.mu_max_n},
              {"sr_nodes_per_unit", c.sr_nodes_per_unit},
              {"legendre_n", c.legendre_n},
              {"l_max", c.l_max},
              {"y_grid", {c.y_min, c.y_max, c.y_step}}};
}

json tolerances_json()
{
  return json{{"root", kRootTolerance},
              {"count_margin", kCountTolerance},
              {"parity", 1e-12},
              {"legendre_convergence", 1e-8},
              {"max_kernel_grid", kMaxKernelGrid},
              {"fiber_richardson", true}};
}

ModelSpec resolved_model(const ExperimentConfig& cfg, json& summary)
{
  ModelSpec m = build_model(cfg);
  ResolvedCouplings rc = resolve_couplings(cfg, m);
  m.mu1 = rc.mu1;
  m.mu2 = rc.mu2;
  summary["couplings"] = json{{"mu1", rc.mu1},
                              {"mu2", rc.mu2},
                              {"mu1_spec", cfg.mu1.str()},
                              {"mu2_spec", cfg.mu2.str()},
                              {"mu0_1", opt(rc.mu0_1)},
                              {"mu0_2", opt(rc.mu0_2)},
                              {"mu_max_1", opt(rc.mu_max_1)},
                              {"mu_max_2", opt(rc.mu_max_2)}};
  return m;
}

void cmd_verify(const ExperimentConfig& cfg, Output& out, json& s)
{
  ModelSpec m = build_model(cfg);
  HypothesisReport rep = verify_hypotheses(m, cfg.hypothesis_n, cfg.fiber_options());
  Table t{"hypotheses", {"check", "passed", "applicable", "value", "tolerance", "detail"}, {}};
  json checks = json::object();
  for (const auto& c : rep.checks) {
    std::string detail = c.detail;
    for (char& ch : detail)
      if (ch == ',' || ch == '\n') ch = ';';
    t.rows.push_back({c.name, c.passed ? "true" : "false", c.applicable ? "true" : "false", num(c.value),
                      num(c.tolerance), detail});
    checks[c.name] = c.passed;
  }
  out.write(t);
  s["results"] = json{{"all_passed", rep.all_passed()}, {"checks", checks}};
  try {
    HessianBlocks hb = estimate_hessian_blocks(m);
    s["results"]["hessian_blocks"] = json{{"l1", hb.l1}, {"l2", hb.l2}, {"l", hb.l}, {"residual", hb.residual}};
  } catch (const DomainError& e) {
    s["results"]["hessian_blocks"] = json{{"error", e.what()}};
  }
}

std::vector<double> default_z() { return {-1e-1, -1e-2, -1e-3, -1e-4, -1e-5, -1e-6}; }

void cmd_friedrichs(const ExperimentConfig& cfg, Output& out, json& s)
{
  ModelSpec m = resolved_model(cfg, s);
  const FiberOptions fo = cfg.fiber_options();
  std::vector<double> zs = cfg.z_values();
  if (zs.empty()) zs = default_z();

  Table dt{"delta", {"alpha", "p1", "p2", "p3", "z", "lambda", "delta"}, {}};
  Table bt{"branch", {"alpha", "p1", "p2", "p3", "present", "z"}, {}};
  json channels = json::array();
  for (Channel a : {Channel::One, Channel::Two}) {
    const double mu = m.mu(a);
    ThresholdClass tc = classify_threshold(m, a, fo);
    MuMaxResult mm = mu_max_detail(m, a, cfg.mu_max_n, fo);
    json ch{{"alpha", static_cast<int>(a)},
            {"mu", mu},
            {"mu0", tc.mu0},
            {"mu_max", mm.value},
            {"mu_max_at", {mm.argmax[0], mm.argmax[1], mm.argmax[2]}},
            {"threshold", to_string(tc.kind)},
            {"phi0", tc.phi0},
            {"delta00", tc.delta00}};

    FiberProfile prof(m, a, TorusPoint(), fo);
    for (double z : zs) {
      double lam = prof.lambda_value(z);
      dt.rows.push_back({std::to_string(static_cast<int>(a)), "0", "0", "0", num(z), num(lam), num(1.0 - mu * lam)});
    }

    BoundStateBranch br = sample_branch(m, a, mu, cfg.branch_n, BranchScope::Negative, fo);
    int present = 0;
    for (size_t i = 0; i < br.p.size(); ++i) {
      present += br.z[i].has_value();
      bt.rows.push_back({std::to_string(static_cast<int>(a)), num(br.p[i][0]), num(br.p[i][1]), num(br.p[i][2]),
                         br.z[i] ? "true" : "false", br.z[i] ? num(*br.z[i]) : ""});
    }
    ch["branch_points"] = br.p.size();
    ch["branch_present"] = present;

    if (tc.kind == ThresholdKind::ZeroEnergyResonance) {
      ExpansionReport er = threshold_expansion_check(m, a, fo);
      ch["expansion"] = json{{"fitted_slope", er.fitted_slope},
                             {"predicted_slope", er.predicted_slope},
                             {"predicted_slope_alt", er.predicted_slope_alt},
                             {"l_index_ambiguous", er.l_index_ambiguous},
                             {"relative_error", er.relative_error},
                             {"fit_residual", er.fit_residual},
                             {"ratio_min", er.ratio_min},
                             {"ratio_max", er.ratio_max}};
    } else if (tc.kind == ThresholdKind::ZeroEigenvalue) {
      QuadraticReport qr = zero_eigenvalue_quadratic_check(m, a, fo);
      ch["quadratic"] = json{{"c_min", qr.c_min},
                             {"floor", qr.floor},
                             {"identity_error", qr.identity_error},
                             {"identity_error_production", qr.identity_error_production},
                             {"identity_production_tolerance", qr.identity_production_tolerance}};
    }
    channels.push_back(ch);
  }
  out.write(dt);
  out.write(bt);
  s["results"] = json{{"channels", channels}};
}

void cmd_spectrum(const ExperimentConfig& cfg, Output& out, json& s)
{
  ModelSpec m = resolved_model(cfg, s);
  EssentialSpectrum es = essential_spectrum(m, cfg.branch_n, cfg.fiber_options());
  Table t{"bands", {"lo", "hi"}, {}};
  json bands = json::array();
  for (const auto& b : es.bands) {
    t.rows.push_back({num(b.lo), num(b.hi)});
    bands.push_back({b.lo, b.hi});
  }
  out.write(t);
  json ch = json::array();
  for (const auto& c : es.channel)
    ch.push_back(json{{"alpha", static_cast<int>(c.alpha)},
                      {"regime", to_string(c.regime)},
                      {"mu", c.mu},
                      {"mu0", c.mu0},
                      {"mu_max", c.mu_max},
                      {"band", c.band ? json{c.band->lo, c.band->hi} : json(nullptr)},
                      {"lo_refinement", c.lo_refinement},
                      {"hi_refinement", c.hi_refinement}});
  s["results"] = json{{"bands", bands},
                      {"regime", to_string(es.regime)},
                      {"M", es.M},
                      {"a1", opt(es.a1)},
                      {"b1", opt(es.b1)},
                      {"a2", opt(es.a2)},
                      {"b2", opt(es.b2)},
                      {"channels", ch}};
}

void cmd_count(const ExperimentConfig& cfg, Output& out, json& s)
{
  std::vector<double> zs = cfg.z_values();
  if (zs.empty()) throw DomainError("count: the z schedule is empty");
  ModelSpec m = resolved_model(cfg, s);
  CountOptions co;
  co.fiber = cfg.fiber_options();
  co.spectrum_grid = cfg.branch_n;
  std::vector<CountResult> rs = count_schedule(m, zs, cfg.kernel_n, co);

  Table t{"counts", {"z", "log_abs_z", "count", "grid_n", "resolution_flag"}, {}};
  Table sv{"singular_values", {"z", "rank", "sigma"}, {}};
  json arr = json::array();
  for (const auto& r : rs) {
    t.rows.push_back({num(r.z), num(std::log(std::abs(r.z))), std::to_string(r.count), std::to_string(r.grid_n),
                      r.resolution_flag ? "true" : "false"});
    for (size_t k = 0; k < r.top_singular_values.size(); ++k)
      sv.rows.push_back({num(r.z), std::to_string(k + 1), num(r.top_singular_values[k])});
    arr.push_back(json{{"z", r.z}, {"count", r.count}, {"resolution_flag", r.resolution_flag}, {"method", r.method}});
  }
  out.write(t);
  out.write(sv);
  s["results"] = json{{"counts", arr}};
}

void cmd_efimov(const ExperimentConfig& cfg, Output& out, json& s)
{
  ModelSpec m = build_model(cfg);
  HessianBlocks hb = estimate_hessian_blocks(m);
  SobolevParams sp = sobolev_params(hb);
  EfimovOptions eo = cfg.efimov_options();

  EfimovEstimate est;
  std::vector<CountResult> rs;
  if (cfg.fit_counts) {
    std::vector<double> zs = cfg.z_values();
    if (zs.empty()) throw DomainError("efimov: fit_counts requires a z schedule");
    ModelSpec rm = resolved_model(cfg, s);
    CountOptions co;
    co.fiber = cfg.fiber_options();
    co.spectrum_grid = cfg.branch_n;
    rs = count_schedule(rm, zs, cfg.kernel_n, co);
    est = fit_nz_slope(rs, sp, eo);
  } else {
    est = efimov_estimate(sp, eo);
  }

  Table dg{"efimov_degrees", {"degree", "multiplicity", "peak", "measure", "contribution"}, {}};
  for (const auto& d : est.detail.degrees)
    dg.rows.push_back({std::to_string(d.degree), std::to_string(2 * d.degree + 1), num(d.peak), num(d.measure),
                       num((2 * d.degree + 1) * d.measure / (4.0 * std::acos(-1.0)))});
  out.write(dg);
  Table yc{"efimov_ycounts", {"y", "count"}, {}};
  for (size_t i = 0; i < est.detail.counts.size(); ++i)
    yc.rows.push_back({num(est.detail.grid.at(static_cast<int>(i))), std::to_string(est.detail.counts[i])});
  out.write(yc);
  Table sr{"efimov_sr", {"r", "nodes", "n", "ratio", "abs_error"}, {}};
  for (const auto& c : est.sr_sequence)
    sr.rows.push_back({num(c.r), std::to_string(c.nodes), std::to_string(c.n), num(c.ratio()),
                       num(std::abs(c.ratio() - est.u0))});
  out.write(sr);
  if (!rs.empty()) {
    Table ct{"counts", {"z", "log_abs_z", "count", "grid_n", "resolution_flag"}, {}};
    for (const auto& r : rs)
      ct.rows.push_back({num(r.z), num(std::log(std::abs(r.z))), std::to_string(r.count), std::to_string(r.grid_n),
                         r.resolution_flag ? "true" : "false"});
    out.write(ct);
  }

  json res{{"sobolev", {{"u12", sp.u12}, {"s12", sp.s12}, {"r12", sp.r12}}},
           {"u0", est.u0},
           {"u0_trapezoid", est.u0_trapezoid},
           {"lower_bound", est.lower_bound},
           {"lower_bound_satisfied", est.lower_bound_satisfied},
           {"degree0_closed_form_error", est.degree0_closed_form_error},
           {"y_grid", {est.detail.grid.lo, est.detail.grid.hi, est.detail.grid.step}},
           {"y_grid_widenings", est.detail.widenings},
           {"top_degree_contributes", est.detail.top_degree_contributes},
           {"sr_error_nonincreasing", est.sr_error_nonincreasing}};
  if (est.has_nz_fit)
    res["nz_fit"] = json{{"slope", est.nz_fit.slope},
                         {"intercept", est.nz_fit.intercept},
                         {"residual", est.nz_fit.residual},
                         {"points", est.nz_fit.points},
                         {"log_range", est.nz_fit.log_range},
                         {"used_flagged_points", est.nz_fit.used_flagged_points},
                         {"range_too_shallow", est.nz_fit.range_too_shallow},
                         {"note", est.nz_fit.note}};
  s["results"] = res;
  if (!est.lower_bound_satisfied)
    s["notes"].push_back("computed U0 = " + num(est.u0) + " lies below the closed-form lower bound log(2 u12)/pi^2 = " +
                         num(est.lower_bound) + "; the bound relies on an inequality that fails near y = 0");
}

}  // namespace

const std::vector<std::string>& commands()
{
  static const std::vector<std::string> c{"verify", "friedrichs", "spectrum", "count", "efimov"};
  return c;
}

int resolve_threads(const std::optional<int>& requested)
{
  if (requested) return *requested;
  if (const char* env = std::getenv("TBSPEC_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return 0;
}

int run(const std::string& command, const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log)
{
  fs::path dir = opts.out_dir ? *opts.out_dir : cfg.out_dir;
  json s;
  s["schema_version"] = kSummarySchemaVersion;
  s["command"] = command;
  s["model"] = cfg.model;
  s["status"] = "ok";
  s["partial"] = false;
  int threads = resolve_threads(opts.threads);
  s["threads"] = threads;
  s["grids"] = grids_json(cfg);
  s["tolerances"] = tolerances_json();
  s["config"] = serialize_config(cfg);
  s["notes"] = json::array();

  std::unique_ptr<Output> out;
  try {
    out = std::make_unique<Output>(dir, cfg.format);
  } catch (const std::exception& e) {
    log << "error: cannot create output directory " << dir << ": " << e.what() << "\n";
    return kExitValidation;
  }
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  int code = kExitOk;
  try {
    if (command == "verify")
      cmd_verify(cfg, *out, s);
    else if (command == "friedrichs")
      cmd_friedrichs(cfg, *out, s);
    else if (command == "spectrum")
      cmd_spectrum(cfg, *out, s);
    else if (command == "count")
      cmd_count(cfg, *out, s);
    else if (command == "efimov")
      cmd_efimov(cfg, *out, s);
    else
      throw DomainError("unknown command '" + command + "'");
  } catch (const DomainError& e) {
    code = kExitValidation;
    s["status"] = "error";
    s["error"] = json{{"kind", "validation"}, {"message", e.what()}};
  } catch (const std::exception& e) {
    code = kExitNumerical;
    s["status"] = "error";
    s["error"] = json{{"kind", "numerical"}, {"message", e.what()}};
  }
  if (code != kExitOk) {
    s["partial"] = !out->files().empty();
    log << "error: " << s["error"]["message"].get<std::string>() << "\n";
  }
  s["tables"] = out->files();
  out->summary(s);
  return code;
}

int run_text(const std::string& command, const std::string& config_text, const RunOptions& opts, std::ostream& log)
{
  ParseResult pr = parse_config(config_text);
  if (!pr.ok()) {
    json s;
    s["schema_version"] = kSummarySchemaVersion;
    s["command"] = command;
    s["status"] = "error";
    s["partial"] = false;
    json diags = json::array();
    for (const auto& d : pr.diagnostics) {
      log << "config:" << d.line << ": " << d.message << "\n";
      diags.push_back(json{{"line", d.line}, {"message", d.message}});
    }
    s["error"] = json{{"kind", "validation"}, {"message", "invalid configuration"}, {"diagnostics", diags}};
    if (opts.out_dir) {
      std::error_code ec;
      fs::create_directories(*opts.out_dir, ec);
      if (!ec) std::ofstream(fs::path(*opts.out_dir) / "summary.json") << s.dump(2) << "\n";
    }
    return kExitValidation;
  }
  return run(command, *pr.config, opts, log);
}

}  // namespace tbspec
