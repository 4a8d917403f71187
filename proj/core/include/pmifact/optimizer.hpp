#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pmifact/embeddings.hpp"

namespace pmifact {

enum class OptimizerKind { adam, sgd };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
  bool operator==(const OptimizerConfig&) const = default;
};

// Moment buffers laid out exactly like the parameters they belong to.
struct OptimizerState {
  std::uint64_t step = 0;
  std::vector<float> m_T, v_T, m_C, v_C, m_b, v_b, m_bt, v_bt;

  bool operator==(const OptimizerState&) const = default;
};

// Adam with bias correction, or plain gradient steps. Updates are lazy: a
// call touches only the slice of parameters it is given, while the step
// counter is global and advanced once per update round by begin_step().
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, const EmbeddingPair& shape);
  Optimizer(OptimizerConfig config, OptimizerState state, const EmbeddingPair& shape);

  const OptimizerConfig& config() const { return config_; }
  const OptimizerState& state() const { return state_; }
  std::uint64_t step() const { return state_.step; }

  void begin_step() { ++state_.step; }

  // grad has rows.size() x d entries in the layout of T's rows.
  void update_term_rows(EmbeddingPair& emb, std::size_t begin, std::size_t count,
                        std::span<const double> grad);
  // grad has d x cols entries in the layout of C's columns.
  void update_context_cols(EmbeddingPair& emb, std::size_t begin, std::size_t count,
                           std::span<const double> grad);
  void update_term_bias(EmbeddingPair& emb, std::size_t begin,
                        std::span<const double> grad);
  void update_context_bias(EmbeddingPair& emb, std::size_t begin,
                           std::span<const double> grad);

 private:
  void apply(std::span<float> param, std::span<float> m, std::span<float> v,
             std::span<const double> grad) const;

  OptimizerConfig config_;
  OptimizerState state_;
};

}  // namespace pmifact
