#include "tbspec/birman_schwinger.hpp"
#include "tbspec/errors.hpp"
#include "tbspec/essential_spectrum.hpp"
#include "tbspec/parallel.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace tbspec {

DeltaTable delta_table(const ModelSpec& model, int grid_n, const std::vector<double>& zs, const FiberOptions& opts)
{
  UniformGrid grid(grid_n);
  const long N = grid.size();
  DeltaTable t;
  t.n = grid_n;
  t.z = zs;
  t.delta1.resize(N, zs.size());
  t.delta2.resize(N, zs.size());
  const long nz = static_cast<long>(zs.size());

  // Delta(-p, z) = Delta(p, z), so each mirror pair is computed once
  parallel_for(N, [&](long i) {
    if (grid.mirror(i) < i) return;
    TorusPoint p(grid.node(i));
    for (Channel a : {Channel::One, Channel::Two}) {
      FiberProfile prof(model, a, p, opts);
      Eigen::MatrixXd& D = a == Channel::One ? t.delta1 : t.delta2;
      for (long k = 0; k < nz; ++k) D(i, k) = prof.delta(zs[k], model.mu(a));
    }
  });
  for (long i = 0; i < N; ++i) {
    long j = grid.mirror(i);
    if (j < i) {
      t.delta1.row(i) = t.delta1.row(j);
      t.delta2.row(i) = t.delta2.row(j);
    }
  }
  return t;
}

KernelBlock assemble_block(const ModelSpec& model, const DeltaTable& table, int zi, BlockOrientation orient)
{
  if (table.n > kMaxKernelGrid)
    throw DomainError("assemble_block: grid_n above 24 exceeds the dense budget; use the asymptotic (efimov) route");
  const double z = table.z.at(zi);
  if (!(z < 0.0)) throw DomainError("assemble_block: z must be strictly negative");

  KernelBlock kb;
  kb.z = z;
  kb.grid = UniformGrid(table.n);
  kb.orientation = orient;
  const UniformGrid& grid = kb.grid;
  const long N = grid.size();

  std::vector<Vec3> nodes(N);
  for (long i = 0; i < N; ++i) nodes[i] = grid.node(i);
  for (long i = 0; i < N; ++i)
    if (!(table.delta1(i, zi) > 0.0) || !(table.delta2(i, zi) > 0.0))
      throw NumericalFault("assemble_block: Delta <= 0 at node " + TorusPoint(nodes[i]).str() +
                           ", z not below the essential spectrum");

  // T12: rows q (Delta_1 side, phi_2), columns t (Delta_2 side, phi_1);
  // T21: rows p (Delta_2 side, phi_1), columns t (Delta_1 side, phi_2).
  const double c = std::sqrt(model.mu1 * model.mu2) * grid.weight();
  Eigen::VectorXd row(N), col(N);
  for (long i = 0; i < N; ++i) {
    if (orient == BlockOrientation::T12) {
      row[i] = model.phi2(nodes[i]) / std::sqrt(table.delta1(i, zi));
      col[i] = model.phi1(nodes[i]) / std::sqrt(table.delta2(i, zi));
    } else {
      row[i] = model.phi1(nodes[i]) / std::sqrt(table.delta2(i, zi));
      col[i] = model.phi2(nodes[i]) / std::sqrt(table.delta1(i, zi));
    }
  }

  kb.matrix.resize(N, N);
  Eigen::MatrixXd& K = kb.matrix;
  parallel_for(N, [&](long j) {
    for (long i = 0; i < N; ++i) {
      // u(t, q) for T12 with t = node j, q = node i; u(p, t) for T21
      double u = orient == BlockOrientation::T12 ? model.dispersion(nodes[j], nodes[i])
                                                 : model.dispersion(nodes[i], nodes[j]);
      K(i, j) = c * row[i] * col[j] / (u - z);
    }
  });
  if (!K.allFinite()) throw NumericalFault("assemble_block: non-finite kernel entry");
  return kb;
}

KernelBlock assemble_block(const ModelSpec& model, double z, int grid_n, const FiberOptions& opts,
                           BlockOrientation orient)
{
  if (grid_n > kMaxKernelGrid)
    throw DomainError("assemble_block: grid_n above 24 exceeds the dense budget; use the asymptotic (efimov) route");
  if (!(z < 0.0)) throw DomainError("assemble_block: z must be strictly negative");
  return assemble_block(model, delta_table(model, grid_n, {z}, opts), 0, orient);
}

namespace {

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& A)
{
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  return qr.householderQ() * Eigen::MatrixXd::Identity(A.rows(), A.cols());
}

// Block subspace iteration with Rayleigh-Ritz: with Z orthonormal and
// K Z = Q R, the singular values of R are the Ritz values. A block method
// is used because symmetric lattice models have repeated singular values.
std::vector<double> subspace_singular_values(const Eigen::MatrixXd& K, const SvdOptions& o)
{
  const long N = K.rows();
  long b = std::min<long>(o.block, N);
  for (;;) {
    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd Z(N, b);
    for (long j = 0; j < b; ++j)
      for (long i = 0; i < N; ++i) Z(i, j) = gauss(rng);
    Z = orthonormalize(Z);

    Eigen::VectorXd prev;
    Eigen::VectorXd sv;
    bool converged = false;
    for (int it = 0; it < o.max_iter; ++it) {
      Eigen::MatrixXd Y = K * Z;
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
      Eigen::MatrixXd R = qr.matrixQR().topRows(b).triangularView<Eigen::Upper>();
      sv = Eigen::JacobiSVD<Eigen::MatrixXd>(R).singularValues();
      if (it > 1) {
        converged = true;
        for (long k = 0; k < b && converged; ++k)
          if (sv[k] >= 0.8 && std::abs(sv[k] - prev[k]) > 1e-13 * std::max(1.0, sv[0])) converged = false;
        // stop early if everything in the block is small
        if (sv[0] < 0.8 && std::abs(sv[0] - prev[0]) < 1e-6) converged = true;
      }
      if (converged) break;
      prev = sv;
      Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(N, b);
      Z = orthonormalize(K.transpose() * Q);
    }
    if (!converged) throw NumericalFault("singular value iteration did not converge");
    if (sv[b - 1] < 0.5 || b == N) return std::vector<double>(sv.data(), sv.data() + sv.size());
    b = std::min<long>(2 * b, N);
  }
}

}  // namespace

std::vector<double> top_singular_values(const Eigen::MatrixXd& K, const SvdOptions& opts, std::string* method)
{
  if (K.size() == 0) return {};
  if (K.rows() <= opts.dense_limit) {
    if (method) *method = "dense-svd";
    Eigen::BDCSVD<Eigen::MatrixXd> svd(K);
    if (svd.info() != Eigen::Success) throw NumericalFault("dense SVD failed");
    Eigen::VectorXd s = svd.singularValues();
    return std::vector<double>(s.data(), s.data() + s.size());
  }
  if (method) *method = "subspace-iteration";
  return subspace_singular_values(K, opts);
}

CountResult count_above_one(const KernelBlock& block, const SvdOptions& opts)
{
  CountResult r;
  r.z = block.z;
  r.grid_n = block.grid.n();
  std::vector<double> sv = top_singular_values(block.matrix, opts, &r.method);
  for (double s : sv)
    if (s > 1.0 + r.tolerance) ++r.count;
  if (sv.size() > 32) sv.resize(32);
  r.top_singular_values = sv;
  r.resolution_flag = 2.0 * std::numbers::pi / r.grid_n > std::sqrt(std::abs(r.z));
  return r;
}

double spectrum_bottom(const ModelSpec& model, const CountOptions& opts)
{
  if (opts.spectrum_bottom) return *opts.spectrum_bottom;
  double bottom = 0.0;
  for (Channel a : {Channel::One, Channel::Two}) {
    double mu0 = mu_zero(model, a, opts.fiber);
    if (model.mu(a) <= mu0 * (1.0 + 1e-10)) continue;
    TwoParticleBand tb = two_particle_band_detail(model, a, model.mu(a), opts.spectrum_grid, opts.fiber);
    if (tb.band) bottom = std::min(bottom, tb.band->lo);
  }
  return bottom;
}

std::vector<CountResult> count_schedule(const ModelSpec& model, const std::vector<double>& zs, int grid_n,
                                        const CountOptions& opts)
{
  if (zs.empty()) return {};
  for (size_t k = 0; k < zs.size(); ++k) {
    if (!(zs[k] < 0.0)) throw DomainError("count_schedule: z must be strictly negative");
    if (k > 0 && !(zs[k] > zs[k - 1])) throw DomainError("count_schedule: schedule must increase strictly toward 0");
  }
  if (grid_n > kMaxKernelGrid)
    throw DomainError("count: grid_n above 24 exceeds the dense budget; use the asymptotic (efimov) route");
  double tau = spectrum_bottom(model, opts);
  if (!(zs.back() < tau)) throw DomainError("count: z is not below the bottom of the essential spectrum");

  DeltaTable table = delta_table(model, grid_n, zs, opts.fiber);
  std::vector<CountResult> out;
  for (size_t k = 0; k < zs.size(); ++k) {
    KernelBlock kb = assemble_block(model, table, static_cast<int>(k));
    out.push_back(count_above_one(kb, opts.svd));
  }
  return out;
}

CountResult eigenvalue_count_N(const ModelSpec& model, double z, int grid_n, const CountOptions& opts)
{
  return count_schedule(model, {z}, grid_n, opts).front();
}

}  // namespace tbspec
