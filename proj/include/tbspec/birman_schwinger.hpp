#ifndef TBSPEC_BIRMAN_SCHWINGER_HPP
#define TBSPEC_BIRMAN_SCHWINGER_HPP

#include "tbspec/friedrichs.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tbspec {

constexpr int kMaxKernelGrid = 24;
constexpr double kCountTolerance = 1e-9;

// Delta_{mu_alpha}(node, z) for every node of the uniform kernel grid and
// every z of a schedule; rows are grid nodes, columns schedule entries.
struct DeltaTable {
  int n = 0;
  std::vector<double> z;
  Eigen::MatrixXd delta1, delta2;
};

DeltaTable delta_table(const ModelSpec& model, int grid_n, const std::vector<double>& zs,
                       const FiberOptions& opts = {});

enum class BlockOrientation { T12, T21 };

struct KernelBlock {
  double z = 0.0;
  UniformGrid grid{4};
  BlockOrientation orientation = BlockOrientation::T12;
  Eigen::MatrixXd matrix;
};

// Nystrom matrix of T12(z) (rows q, columns t) or T21(z) (rows p, columns t),
// with the uniform weight absorbed.
KernelBlock assemble_block(const ModelSpec& model, double z, int grid_n, const FiberOptions& opts = {},
                           BlockOrientation orient = BlockOrientation::T12);
// Same with Delta values taken from a table (column zi); the table is not
// recomputed from the model's couplings.
KernelBlock assemble_block(const ModelSpec& model, const DeltaTable& table, int zi,
                           BlockOrientation orient = BlockOrientation::T12);

struct CountResult {
  double z = 0.0;
  int count = 0;
  std::vector<double> top_singular_values;  // descending
  int grid_n = 0;
  double tolerance = kCountTolerance;
  bool resolution_flag = false;  // 2 pi / grid_n > sqrt|z|
  std::string method;
};

struct SvdOptions {
  long dense_limit = 2500;  // dense SVD up to this dimension
  int block = 32;           // initial block size of the subspace iteration
  int max_iter = 200;
  unsigned long seed = 12345;
};

// Leading singular values, descending; all of them for the dense route.
std::vector<double> top_singular_values(const Eigen::MatrixXd& K, const SvdOptions& opts = {},
                                        std::string* method = nullptr);

CountResult count_above_one(const KernelBlock& block, const SvdOptions& opts = {});

struct CountOptions {
  FiberOptions fiber;
  SvdOptions svd;
  // Bottom of the essential spectrum if already known; otherwise it is
  // determined from the couplings (0 when both mu_alpha <= mu0_alpha).
  std::optional<double> spectrum_bottom;
  int spectrum_grid = 8;
};

double spectrum_bottom(const ModelSpec& model, const CountOptions& opts);

CountResult eigenvalue_count_N(const ModelSpec& model, double z, int grid_n, const CountOptions& opts = {});

std::vector<CountResult> count_schedule(const ModelSpec& model, const std::vector<double>& zs, int grid_n,
                                        const CountOptions& opts = {});

}  // namespace tbspec

#endif
