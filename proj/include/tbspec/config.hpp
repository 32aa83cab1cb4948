#ifndef TBSPEC_CONFIG_HPP
#define TBSPEC_CONFIG_HPP

#include "tbspec/efimov.hpp"
#include "tbspec/friedrichs.hpp"
#include "tbspec/model.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace tbspec {

// A coupling given as a number or as a multiple of a channel threshold.
struct CouplingSpec {
  enum class Kind { Value, Mu0, MuMax };
  Kind kind = Kind::Mu0;
  double factor = 1.0;  // the value itself for Kind::Value

  static CouplingSpec parse(const std::string& text);  // "1.5", "mu0", "mu_max", "2*mu_max"
  std::string str() const;
  bool operator==(const CouplingSpec&) const = default;
};

struct FormSpec {
  std::array<double, 4> cos{1.0, 0.0, 0.0, 0.0};  // reference-cos coefficients a0..a3
  double sin_amplitude = 1.0;                     // reference-sin amplitude
  std::string expression;                         // expression models, variables p1..p3
  Parity parity = Parity::Even;
  bool operator==(const FormSpec&) const = default;
};

struct GeometricRange {
  double start = -1e-2, stop = -1e-4;
  int count = 3;
  bool operator==(const GeometricRange&) const = default;
};

struct ExperimentConfig {
  // model
  std::string model = "reference-cos";  // reference-cos | reference-sin | expression
  std::string dispersion;                // expression models, variables p1..p3, q1..q3
  std::array<FormSpec, 2> phi;
  // couplings
  CouplingSpec mu1, mu2;
  // grids
  int quad_n = 24;        // fiber quadrature
  int scan_n = 24;        // slice-minimum scan
  int kernel_n = 12;      // Birman-Schwinger kernel
  int branch_n = 16;      // p-grid for branches and bands
  int hypothesis_n = 8;   // p-grid for hypothesis sampling
  int mu_max_n = 8;       // p-grid for the mu_max search
  double sr_nodes_per_unit = 8.0;
  // schedules
  std::vector<double> z;
  std::optional<GeometricRange> z_range;
  std::vector<double> r{25, 50, 100, 200};
  // efimov
  int l_max = 8;
  int legendre_n = 64;
  double y_min = -50.0, y_max = 50.0, y_step = 0.05;
  bool fit_counts = false;
  // output
  std::string out_dir = "out";
  std::string format = "csv";  // csv | json

  bool operator==(const ExperimentConfig&) const = default;

  // z schedule: explicit list followed by the geometric range, sorted increasing
  std::vector<double> z_values() const;
  FiberOptions fiber_options() const { return FiberOptions{scan_n, quad_n, true}; }
  EfimovOptions efimov_options() const;
};

struct Diagnostic {
  int line = 0;  // 1-based, 0 for whole-file problems
  std::string message;
};

struct ParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return config.has_value(); }
};

ParseResult parse_config(const std::string& text);
std::string serialize_config(const ExperimentConfig& cfg);

// The model with unit couplings; throws DomainError on invalid settings
// (including parity contradictions of expression form factors).
ModelSpec build_model(const ExperimentConfig& cfg);

struct ResolvedCouplings {
  double mu1 = 0.0, mu2 = 0.0;
  std::optional<double> mu0_1, mu0_2, mu_max_1, mu_max_2;  // thresholds computed on the way
};

// Resolves symbolic couplings against the configured grids.
ResolvedCouplings resolve_couplings(const ExperimentConfig& cfg, const ModelSpec& unit_model);

}  // namespace tbspec

#endif
