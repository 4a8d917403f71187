#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pmifact/cooc_stats.hpp"
#include "pmifact/embeddings.hpp"
#include "pmifact/losses.hpp"
#include "pmifact/optimizer.hpp"

namespace pmifact {

struct IndexRange {
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  std::uint32_t size() const { return end - begin; }
  bool operator==(const IndexRange&) const = default;
};

struct Block {
  IndexRange rows;
  IndexRange cols;
  bool operator==(const Block&) const = default;
};

// Row-major tiling of the |V_T| x |V_C| grid.
struct ShardPlan {
  std::uint32_t shard_rows = 0;
  std::uint32_t shard_cols = 0;
  std::vector<Block> blocks;
};

ShardPlan make_shard_plan(std::uint32_t n_rows, std::uint32_t n_cols,
                          std::uint32_t shard_rows, std::uint32_t shard_cols);

using RowMatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ShardGradient {
  Block block;
  RowMatrixD grad_T;         // rows x d, Delta C_block^T
  Eigen::MatrixXd grad_C;    // d x cols, T_block^T Delta
  Eigen::VectorXd grad_b;    // row sums of Delta (biases only)
  Eigen::VectorXd grad_bt;   // column sums of Delta (biases only)
  RowMatrixD delta;          // filled only when requested, dense losses only
  double loss = 0.0;
};

struct ShardOptions {
  // Rows of the block are split into this many contiguous parts, each
  // handled by its own thread; partial column gradients are then summed in
  // part order, so results depend on the part count but not on scheduling.
  unsigned threads = 1;
  bool keep_delta = false;
};

// Gradient of the summed cell losses over one block. Dense losses evaluate
// every cell, GloVe only the stored ones. NumericalError names the cell when
// a dot product is not finite.
ShardGradient shard_gradient(const CoocStats& stats, const EmbeddingPair& emb,
                             const Block& block, const LossKernel& kernel,
                             const ShardOptions& options = {});
ShardGradient shard_gradient(const CoocStats& stats, const EmbeddingPair& emb,
                             const Block& block, const LossSpec& spec);

// Full gradient in double precision, shard gradients summed into place.
struct FullGradient {
  RowMatrixD grad_T;
  Eigen::MatrixXd grad_C;
  Eigen::VectorXd grad_b;
  Eigen::VectorXd grad_bt;
  double loss = 0.0;
};

FullGradient full_gradient(const CoocStats& stats, const EmbeddingPair& emb,
                           const ShardPlan& plan, const LossKernel& kernel,
                           const ShardOptions& options = {});

// When the optimizer steps: after every shard, or once per epoch on the full
// gradient (plain full-batch descent).
enum class UpdatePolicy { per_shard, per_epoch };

std::string_view to_string(UpdatePolicy policy);
UpdatePolicy parse_update_policy(std::string_view name);

struct EpochReport {
  std::uint32_t epoch = 0;  // 1-based, counting resumed epochs
  double loss = 0.0;
  double seconds = 0.0;
};

struct TrainOptions {
  std::uint32_t dim = 300;
  std::uint32_t epochs = 10;
  std::optional<double> learning_rate;  // loss default when empty
  std::uint64_t seed = 1;
  std::uint32_t shard_rows = 4096;
  std::uint32_t shard_cols = 4096;
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  UpdatePolicy policy = UpdatePolicy::per_shard;
  bool shuffle_shards = true;
  unsigned threads = 1;
};

OptimizerConfig optimizer_config(const TrainOptions& options, const LossSpec& spec);

// Everything needed to continue a run.
struct TrainState {
  EmbeddingPair emb;
  OptimizerState optimizer;
  std::uint32_t epochs_done = 0;
  std::vector<double> loss_trace;
};

// Called after every completed epoch with the state reached so far.
using EpochCallback = std::function<void(const EpochReport&, const TrainState&)>;

TrainState initial_state(const CoocStats& stats, const LossSpec& spec,
                         const TrainOptions& options);

// Runs options.epochs more epochs on `state`. The loss trace gets one entry
// per epoch: the summed cell loss seen while sweeping the shards. Shard order
// is shuffled per epoch from (seed, epoch number), so a resumed run repeats
// the uninterrupted one. NumericalError on divergence, with epoch and shard.
void train(const CoocStats& stats, const LossSpec& spec, const TrainOptions& options,
           TrainState& state, const EpochCallback& on_epoch = {});

// Fresh run from the seeded initialization.
TrainState train(const CoocStats& stats, const LossSpec& spec, const TrainOptions& options);

}  // namespace pmifact
