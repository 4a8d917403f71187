#include "pmifact/optimizer.hpp"

#include <cmath>
#include <string>

#include "pmifact/error.hpp"

namespace pmifact {

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::adam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd") return OptimizerKind::sgd;
  throw UsageError("unknown optimizer '" + std::string(name) + "' (expected adam or sgd)");
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw UsageError("learning rate must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw UsageError("moment decay rates must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
}

namespace {

std::size_t moment_size(const OptimizerConfig& c, Eigen::Index n) {
  return c.kind == OptimizerKind::adam ? static_cast<std::size_t>(n) : 0;
}

}  // namespace

Optimizer::Optimizer(OptimizerConfig config, const EmbeddingPair& shape)
    : config_(config) {
  config_.validate();
  const auto t = moment_size(config_, shape.T.size());
  const auto c = moment_size(config_, shape.C.size());
  const auto b = moment_size(config_, shape.b.size());
  const auto bt = moment_size(config_, shape.b_tilde.size());
  state_.m_T.assign(t, 0.f);
  state_.v_T.assign(t, 0.f);
  state_.m_C.assign(c, 0.f);
  state_.v_C.assign(c, 0.f);
  state_.m_b.assign(b, 0.f);
  state_.v_b.assign(b, 0.f);
  state_.m_bt.assign(bt, 0.f);
  state_.v_bt.assign(bt, 0.f);
}

Optimizer::Optimizer(OptimizerConfig config, OptimizerState state,
                     const EmbeddingPair& shape)
    : config_(config), state_(std::move(state)) {
  config_.validate();
  const bool ok = state_.m_T.size() == moment_size(config_, shape.T.size()) &&
                  state_.v_T.size() == state_.m_T.size() &&
                  state_.m_C.size() == moment_size(config_, shape.C.size()) &&
                  state_.v_C.size() == state_.m_C.size() &&
                  state_.m_b.size() == moment_size(config_, shape.b.size()) &&
                  state_.v_b.size() == state_.m_b.size() &&
                  state_.m_bt.size() == moment_size(config_, shape.b_tilde.size()) &&
                  state_.v_bt.size() == state_.m_bt.size();
  if (!ok) throw DataError("optimizer state does not match the embedding shapes");
}

void Optimizer::apply(std::span<float> param, std::span<float> m, std::span<float> v,
                      std::span<const double> grad) const {
  if (grad.size() != param.size()) throw UsageError("gradient/parameter size mismatch");
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::sgd) {
    for (std::size_t k = 0; k < param.size(); ++k) {
      param[k] = static_cast<float>(param[k] - lr * grad[k]);
    }
    return;
  }
  const double b1 = config_.beta1, b2 = config_.beta2, eps = config_.epsilon;
  const auto t = static_cast<double>(state_.step == 0 ? 1 : state_.step);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  for (std::size_t k = 0; k < param.size(); ++k) {
    const double g = grad[k];
    const double mk = b1 * m[k] + (1.0 - b1) * g;
    const double vk = b2 * v[k] + (1.0 - b2) * g * g;
    m[k] = static_cast<float>(mk);
    v[k] = static_cast<float>(vk);
    param[k] = static_cast<float>(param[k] - lr * (mk / c1) / (std::sqrt(vk / c2) + eps));
  }
}

namespace {

std::span<float> slice(std::vector<float>& v, std::size_t begin, std::size_t n) {
  if (v.empty()) return {};
  return {v.data() + begin, n};
}

}  // namespace

void Optimizer::update_term_rows(EmbeddingPair& emb, std::size_t begin, std::size_t count,
                                 std::span<const double> grad) {
  const auto d = static_cast<std::size_t>(emb.dim());
  std::span<float> p(emb.T.data() + begin * d, count * d);
  apply(p, slice(state_.m_T, begin * d, count * d), slice(state_.v_T, begin * d, count * d),
        grad);
}

void Optimizer::update_context_cols(EmbeddingPair& emb, std::size_t begin,
                                    std::size_t count, std::span<const double> grad) {
  const auto d = static_cast<std::size_t>(emb.dim());
  std::span<float> p(emb.C.data() + begin * d, count * d);
  apply(p, slice(state_.m_C, begin * d, count * d), slice(state_.v_C, begin * d, count * d),
        grad);
}

void Optimizer::update_term_bias(EmbeddingPair& emb, std::size_t begin,
                                 std::span<const double> grad) {
  std::span<float> p(emb.b.data() + begin, grad.size());
  apply(p, slice(state_.m_b, begin, grad.size()), slice(state_.v_b, begin, grad.size()),
        grad);
}

void Optimizer::update_context_bias(EmbeddingPair& emb, std::size_t begin,
                                    std::span<const double> grad) {
  std::span<float> p(emb.b_tilde.data() + begin, grad.size());
  apply(p, slice(state_.m_bt, begin, grad.size()), slice(state_.v_bt, begin, grad.size()),
        grad);
}

}  // namespace pmifact
