#include "tbspec/hypotheses.hpp"
#include "tbspec/errors.hpp"
#include "tbspec/optimize.hpp"
#include "tbspec/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace tbspec {

bool HypothesisReport::all_passed() const
{
  return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.passed; });
}

const HypothesisCheck& HypothesisReport::at(const std::string& name) const
{
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw DomainError("no hypothesis check named '" + name + "'");
}

namespace {

constexpr long kMaxPairs = 1L << 21;

// (p,q) pairs of grid nodes: all of them when affordable, otherwise a fixed
// random subset. The pair (0,0) is always included.
std::vector<std::pair<long, long>> sample_pairs(const UniformGrid& g)
{
  const long N = g.size();
  std::vector<std::pair<long, long>> out;
  if (N * N <= kMaxPairs) {
    out.reserve(N * N);
    for (long i = 0; i < N; ++i)
      for (long j = 0; j < N; ++j) out.emplace_back(i, j);
    return out;
  }
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<long> pick(0, N - 1);
  out.reserve(kMaxPairs);
  out.emplace_back(g.center_linear(), g.center_linear());
  while (static_cast<long>(out.size()) < kMaxPairs) out.emplace_back(pick(rng), pick(rng));
  return out;
}

std::string fmt(double v)
{
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void check_dispersion(const ModelSpec& model, const UniformGrid& g, HypothesisReport& rep)
{
  auto pairs = sample_pairs(g);
  std::vector<Vec3> nodes(g.size());
  for (long i = 0; i < g.size(); ++i) nodes[i] = g.node(i);
  const long c = g.center_linear();

  double asym = 0.0, scale = 0.0, umin = 1e300, u00 = 0.0;
  for (auto [i, j] : pairs) {
    double u = model.dispersion(nodes[i], nodes[j]);
    double v = model.dispersion(wrap(Vec3(-nodes[i])), wrap(Vec3(-nodes[j])));
    asym = std::max(asym, std::abs(u - v));
    scale = std::max(scale, std::abs(u));
    if (i == c && j == c)
      u00 = u;
    else
      umin = std::min(umin, u);
  }
  const double rel = asym / std::max(scale, 1e-300);
  rep.checks.push_back({"u-evenness", rel <= 1e-12, true, rel, 1e-12,
                        "max |u(p,q) - u(-p,-q)| / max|u| over " + std::to_string(pairs.size()) + " grid pairs"});
  const bool pos = std::abs(u00) <= 1e-12 && umin > 0.0;
  rep.checks.push_back({"u-positivity", pos, true, umin, 0.0,
                        "u(0,0) = " + fmt(u00) + ", min u off (0,0) = " + fmt(umin)});

  HypothesisCheck hc{"u-hessian-blocks", false, true, 0.0, 1e-5, ""};
  try {
    HessianBlocks hb = estimate_hessian_blocks(model);
    hc.value = hb.residual;
    hc.passed = hb.det() > 0.0;
    hc.detail = "l1 = " + fmt(hb.l1) + ", l2 = " + fmt(hb.l2) + ", l = " + fmt(hb.l) + ", l1 l2 - l^2 = " + fmt(hb.det());
  } catch (const std::exception& e) {
    hc.detail = e.what();
  }
  rep.checks.push_back(hc);
}

void check_channel(const ModelSpec& model, Channel a, const UniformGrid& g, const FiberOptions& opts,
                   HypothesisReport& rep)
{
  const std::string tag = "phi" + std::to_string(static_cast<int>(a));
  const std::string lam = "lambda" + std::to_string(static_cast<int>(a));
  const FormFactor& phi = model.phi(a);

  double pv = parity_violation([&](const Vec3& p) { return phi(p); }, phi.parity());
  bool pv_ok = pv <= 1e-12 && (phi.parity() == Parity::Even || std::abs(phi.value_at_zero()) <= 1e-12);
  rep.checks.push_back({tag + "-parity", pv_ok, true, pv, 1e-12,
                        std::string(phi.parity() == Parity::Even ? "even" : "odd") + ", phi(0) = " +
                            fmt(phi.value_at_zero())});

  // Lambda(p,0) < Lambda(0,0) at every grid node p != 0
  HypothesisCheck mx{lam + "-max-at-0", false, true, 0.0, 1.0, ""};
  try {
    const double l0 = lambda_of(model, a, TorusPoint(), 0.0, opts);
    const long N = g.size(), c = g.center_linear();
    std::vector<double> ratio(N, 0.0);
    parallel_for(N, [&](long i) {
      if (i == c || g.mirror(i) < i) return;
      ratio[i] = lambda_of(model, a, TorusPoint(g.node(i)), 0.0, opts) / l0;
    });
    mx.value = *std::max_element(ratio.begin(), ratio.end());
    mx.passed = l0 > 0.0 && mx.value < 1.0;
    mx.detail = "max over grid of Lambda(p,0)/Lambda(0,0), Lambda(0,0) = " + fmt(l0);
  } catch (const std::exception& e) {
    mx.detail = e.what();
  }
  rep.checks.push_back(mx);

  // non-degenerate maximum: only meaningful when Lambda is C^2 at 0
  HypothesisCheck hs{lam + "-hessian-negative", true, false, 0.0, 0.0, "not applicable: phi(0) != 0"};
  if (std::abs(phi.value_at_zero()) <= 1e-12) {
    hs.applicable = true;
    try {
      auto f = [&](const Vec3& p) { return lambda_of(model, a, TorusPoint(p), 0.0, opts); };
      Mat3 H = hessian_fd<3>(f, Vec3::Zero(), 0.05);
      Mat3 Hs = 0.5 * (H + H.transpose());
      Eigen::SelfAdjointEigenSolver<Mat3> es(Hs);
      hs.value = es.eigenvalues().maxCoeff();
      hs.passed = hs.value < 0.0;
      hs.detail = "eigenvalues " + fmt(es.eigenvalues()[0]) + ", " + fmt(es.eigenvalues()[1]) + ", " +
                  fmt(es.eigenvalues()[2]) + " (finite differences, step 0.05)";
    } catch (const std::exception& e) {
      hs.passed = false;
      hs.detail = e.what();
    }
  }
  rep.checks.push_back(hs);

  // Lambda(p) - Lambda(0) against the two-integral representation
  HypothesisCheck id{lam + "-difference-identity", false, true, 0.0, 0.0, ""};
  try {
    const bool exact = std::abs(phi.value_at_zero()) <= 1e-12;
    bool ok = true;
    double matched = 0.0, prod = 0.0, tol = 0.0;
    for (Vec3 p : {Vec3(0.3, 0.0, 0.0), Vec3(0.2, -0.4, 0.1), Vec3(1.0, 1.0, 1.0), Vec3(3.0, -2.0, 0.5)}) {
      LambdaIdentity li = lambda_difference_identity(model, a, TorusPoint(p), opts);
      double em = std::abs(li.lhs - li.rhs());
      double ep = std::abs(li.lhs_production - li.rhs());
      matched = std::max(matched, em / std::max(1.0, std::abs(li.lhs)));
      prod = std::max(prod, ep);
      tol = std::max(tol, li.production_error);
      ok = ok && ep <= li.production_error && (!exact || em <= 1e-8 * std::max(1.0, std::abs(li.lhs)));
    }
    id.passed = ok;
    id.value = exact ? matched : prod;
    id.tolerance = exact ? 1e-8 : tol;
    id.detail = "same-grid relative error " + fmt(matched) + "; production difference error " + fmt(prod) +
                " within estimate " + fmt(tol);
  } catch (const std::exception& e) {
    id.detail = e.what();
  }
  rep.checks.push_back(id);
}

}  // namespace

HypothesisReport verify_hypotheses(const ModelSpec& model, int grid_n, const FiberOptions& opts)
{
  if (grid_n < 8) throw DomainError("verify_hypotheses: grid_n must be at least 8");
  HypothesisReport rep;
  rep.model = model.name;
  rep.grid_n = grid_n;
  rep.quad_n = opts.quad_n;
  UniformGrid g(grid_n);
  check_dispersion(model, g, rep);
  for (Channel a : {Channel::One, Channel::Two}) check_channel(model, a, g, opts, rep);
  return rep;
}

}  // namespace tbspec
