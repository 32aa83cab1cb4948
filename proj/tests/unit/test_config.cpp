#include "tbspec/config.hpp"

#include <doctest.h>

using namespace tbspec;

namespace {
const char* kMinimal = R"(
[model]
name = reference-cos
[couplings]
mu1 = mu0
mu2 = 1.5*mu0
)";
}  // namespace

TEST_CASE("minimal config parses")
{
  ParseResult r = parse_config(kMinimal);
  REQUIRE(r.ok());
  const ExperimentConfig& c = *r.config;
  CHECK(c.model == "reference-cos");
  CHECK(c.mu1.kind == CouplingSpec::Kind::Mu0);
  CHECK(c.mu2.kind == CouplingSpec::Kind::Mu0);
  CHECK(c.mu2.factor == 1.5);
  CHECK(c.quad_n == 24);
}

TEST_CASE("coupling tokens")
{
  CHECK(CouplingSpec::parse("mu_max").kind == CouplingSpec::Kind::MuMax);
  CHECK(CouplingSpec::parse("2 * mu_max").factor == 2.0);
  CHECK(CouplingSpec::parse("mu0*0.5").factor == 0.5);
  CouplingSpec v = CouplingSpec::parse("0.0125");
  CHECK(v.kind == CouplingSpec::Kind::Value);
  CHECK(v.factor == 0.0125);
  CHECK_THROWS(CouplingSpec::parse("mu1"));
  CHECK_THROWS(CouplingSpec::parse("-1"));
  CHECK_THROWS(CouplingSpec::parse("0*mu0"));
  CHECK(CouplingSpec::parse(CouplingSpec::parse("1.5*mu0").str()) == CouplingSpec::parse("1.5*mu0"));
}

TEST_CASE("diagnostics carry line numbers")
{
  ParseResult r = parse_config("[model]\nname = reference-cos\nbogus = 3\n[nowhere]\nx = 1\n[grids]\nquad_n = 7\n");
  CHECK_FALSE(r.ok());
  REQUIRE(r.diagnostics.size() == 3);
  CHECK(r.diagnostics[0].line == 3);
  CHECK(r.diagnostics[1].line == 4);
  CHECK(r.diagnostics[2].line == 7);

  ParseResult d = parse_config("[couplings]\nmu1 = mu0\nmu1 = mu0\n");
  REQUIRE(d.diagnostics.size() == 1);
  CHECK(d.diagnostics[0].line == 3);

  ParseResult e = parse_config("[model]\nname = expression\nu = 3 - cos(p1\n");
  REQUIRE_FALSE(e.ok());
  CHECK(e.diagnostics[0].line == 3);
}

TEST_CASE("parity contradictions are configuration errors")
{
  const char* text = R"([model]
name = expression
u = 3 - cos(p1) - cos(q1) - cos(p1 - q1) + 3 - cos(p2) - cos(q2) - cos(p2 - q2) + 3 - cos(p3) - cos(q3) - cos(p3 - q3)
phi1 = sin(p1)
phi1.parity = even
phi2 = 1
phi2.parity = even
)";
  ParseResult r = parse_config(text);
  REQUIRE_FALSE(r.ok());
  CHECK(r.diagnostics[0].line == 4);
  CHECK(r.diagnostics[0].message.find("not even") != std::string::npos);

  std::string fixed = text;
  fixed.replace(fixed.find("phi1.parity = even"), 18, "phi1.parity = odd");
  ParseResult ok = parse_config(fixed);
  REQUIRE(ok.ok());
  ModelSpec m = build_model(*ok.config);
  Vec3 p(0.3, -0.2, 1.0), q(1.1, 0.4, -0.6);
  CHECK(m.dispersion(p, q) == doctest::Approx(reference_dispersion(p, q)).epsilon(1e-14));
  CHECK(m.phi1.parity() == Parity::Odd);

  ParseResult odd_u = parse_config("[model]\nname = expression\nu = 1 - cos(p1) + sin(q2)\nphi1 = 1\nphi2 = 1\n");
  CHECK_FALSE(odd_u.ok());
}

TEST_CASE("serialization round trip")
{
  const char* text = R"([model]
name = reference-sin
phi1.a = 2.5
[couplings]
mu1 = 0.7*mu_max
mu2 = 0.01
[grids]
quad_n = 16
kernel_n = 10
sr_nodes_per_unit = 6.5
[schedule]
z = -0.1, -0.01
z_range = -1e-3, -1e-5, 3
r = 10, 20
[efimov]
y_step = 0.1
fit_counts = yes
[output]
dir = results/run1
format = json
)";
  ParseResult r = parse_config(text);
  REQUIRE(r.ok());
  std::string s = serialize_config(*r.config);
  ParseResult again = parse_config(s);
  REQUIRE(again.ok());
  CHECK(*again.config == *r.config);
  CHECK(serialize_config(*again.config) == s);

  std::vector<double> z = r.config->z_values();
  REQUIRE(z.size() == 5);
  CHECK(z.front() == -0.1);
  CHECK(z[2] == doctest::Approx(-1e-3));
  CHECK(z[3] == doctest::Approx(-1e-4));
  CHECK(z.back() == doctest::Approx(-1e-5));
}

TEST_CASE("symbolic couplings resolve on the configured grid")
{
  ParseResult r = parse_config(kMinimal);
  REQUIRE(r.ok());
  ModelSpec m = build_model(*r.config);
  ResolvedCouplings rc = resolve_couplings(*r.config, m);
  REQUIRE(rc.mu0_1.has_value());
  CHECK(rc.mu1 == *rc.mu0_1);
  CHECK(rc.mu2 == doctest::Approx(1.5 * *rc.mu0_2));
  // mu0 is consistent with Delta evaluated on the same quadrature
  CHECK(std::abs(delta(m, Channel::One, TorusPoint(), 0.0, rc.mu1, r.config->fiber_options())) < 1e-12);
}
