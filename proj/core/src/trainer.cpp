#include "pmifact/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "pmifact/error.hpp"

namespace pmifact {

ShardPlan make_shard_plan(std::uint32_t n_rows, std::uint32_t n_cols,
                          std::uint32_t shard_rows, std::uint32_t shard_cols) {
  if (shard_rows == 0 || shard_cols == 0) throw UsageError("shard sizes must be positive");
  ShardPlan plan{shard_rows, shard_cols, {}};
  for (std::uint32_t r = 0; r < n_rows; r += std::min(shard_rows, n_rows - r)) {
    const std::uint32_t r1 = r + std::min(shard_rows, n_rows - r);
    for (std::uint32_t c = 0; c < n_cols; c += std::min(shard_cols, n_cols - c)) {
      const std::uint32_t c1 = c + std::min(shard_cols, n_cols - c);
      plan.blocks.push_back({{r, r1}, {c, c1}});
    }
  }
  return plan;
}

namespace {

struct PartResult {
  double loss = 0.0;
  Eigen::MatrixXd grad_C;   // d x cols (dense) or cols x d transposed (sparse)
  Eigen::VectorXd grad_bt;
  std::string error;
};

std::string cell_error(TokenId i, TokenId j, double dot) {
  std::ostringstream os;
  os << "non-finite dot product " << dot << " at cell (" << i << ", " << j << ")";
  return os.str();
}

// First stored column >= c0 in row i, and the end of the row.
std::pair<std::size_t, std::size_t> row_window(const CoocStats& stats, TokenId i,
                                               std::uint32_t c0) {
  const auto cols = stats.row_cols(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), c0);
  return {static_cast<std::size_t>(it - cols.begin()), cols.size()};
}

template <class Fn>
void run_parts(unsigned parts, Fn&& fn) {
  if (parts <= 1) {
    fn(0u);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(parts - 1);
  for (unsigned p = 1; p < parts; ++p) pool.emplace_back([&fn, p] { fn(p); });
  fn(0u);
}

}  // namespace

ShardGradient shard_gradient(const CoocStats& stats, const EmbeddingPair& emb,
                             const Block& block, const LossKernel& kernel,
                             const ShardOptions& options) {
  const auto& spec = kernel.spec();
  const std::uint32_t r0 = block.rows.begin, c0 = block.cols.begin;
  const Eigen::Index nr = block.rows.size(), nc = block.cols.size(), d = emb.dim();
  if (block.rows.end > emb.terms() || block.cols.end > emb.contexts() ||
      block.rows.end > stats.vocab_size() || block.cols.end > stats.vocab_size() ||
      block.rows.begin > block.rows.end || block.cols.begin > block.cols.end) {
    throw UsageError("shard block outside the embedding or statistics bounds");
  }
  if (spec.has_biases() != emb.has_biases()) {
    throw UsageError("embedding biases do not match the loss");
  }

  ShardGradient g;
  g.block = block;
  g.grad_T = RowMatrixD::Zero(nr, d);
  const RowMatrixD Tb = emb.T.middleRows(r0, nr).cast<double>();

  const unsigned parts = static_cast<unsigned>(
      std::clamp<Eigen::Index>(options.threads, 1, std::max<Eigen::Index>(nr, 1)));
  std::vector<PartResult> results(parts);
  auto part_rows = [&](unsigned p) {
    const Eigen::Index a = nr * p / parts, b = nr * (p + 1) / parts;
    return std::pair{a, b};
  };

  if (!spec.sparse()) {
    const Eigen::MatrixXd Cb = emb.C.middleCols(c0, nc).cast<double>();
    RowMatrixD D(nr, nc);
    run_parts(parts, [&](unsigned p) {
      auto [a, b] = part_rows(p);
      PartResult& res = results[p];
      if (b == a) {
        res.grad_C = Eigen::MatrixXd::Zero(d, nc);
        return;
      }
      auto Dp = D.middleRows(a, b - a);
      Dp.noalias() = Tb.middleRows(a, b - a) * Cb;
      for (Eigen::Index r = a; r < b; ++r) {
        const auto i = static_cast<TokenId>(r0 + r);
        const auto cols = stats.row_cols(i);
        const auto vals = stats.row_values(i);
        auto [k, end] = row_window(stats, i, c0);
        for (Eigen::Index c = 0; c < nc; ++c) {
          const auto j = static_cast<TokenId>(c0 + c);
          double nij = 0.0;
          if (k < end && cols[k] == j) nij = vals[k++];
          const double dot = D(r, c);
          if (!std::isfinite(dot)) {
            if (res.error.empty()) res.error = cell_error(i, j, dot);
            D(r, c) = 0.0;
            continue;
          }
          const CellGradient cg = kernel.cell(i, j, nij, dot);
          D(r, c) = cg.delta;
          res.loss += cg.loss;
        }
      }
      g.grad_T.middleRows(a, b - a).noalias() = Dp * Cb.transpose();
      res.grad_C.noalias() = Tb.middleRows(a, b - a).transpose() * Dp;
    });
    if (options.keep_delta) g.delta = std::move(D);
  } else {
    // Context vectors as rows, so both operands of every cell are contiguous.
    const RowMatrixD Ct = emb.C.middleCols(c0, nc).transpose().cast<double>();
    g.grad_b = Eigen::VectorXd::Zero(nr);
    run_parts(parts, [&](unsigned p) {
      auto [a, b] = part_rows(p);
      PartResult& res = results[p];
      RowMatrixD gCt = RowMatrixD::Zero(nc, d);
      res.grad_bt = Eigen::VectorXd::Zero(nc);
      for (Eigen::Index r = a; r < b; ++r) {
        const auto i = static_cast<TokenId>(r0 + r);
        const auto cols = stats.row_cols(i);
        const auto vals = stats.row_values(i);
        auto [k, end] = row_window(stats, i, c0);
        const double bi = emb.b(i);
        for (; k < end && cols[k] < block.cols.end; ++k) {
          const TokenId j = cols[k];
          const Eigen::Index c = j - c0;
          const double dot = Tb.row(r).dot(Ct.row(c));
          if (!std::isfinite(dot)) {
            if (res.error.empty()) res.error = cell_error(i, j, dot);
            continue;
          }
          const CellGradient cg = kernel.cell(i, j, vals[k], dot, bi, emb.b_tilde(j));
          g.grad_T.row(r).noalias() += cg.delta * Ct.row(c);
          gCt.row(c).noalias() += cg.delta * Tb.row(r);
          g.grad_b(r) += cg.delta;
          res.grad_bt(c) += cg.delta;
          res.loss += cg.loss;
        }
      }
      res.grad_C = gCt.transpose();
    });
  }

  for (const auto& res : results) {
    if (!res.error.empty()) throw NumericalError(res.error);
  }
  g.grad_C = std::move(results[0].grad_C);
  g.loss = results[0].loss;
  if (spec.sparse()) g.grad_bt = std::move(results[0].grad_bt);
  for (unsigned p = 1; p < parts; ++p) {
    g.grad_C += results[p].grad_C;
    g.loss += results[p].loss;
    if (spec.sparse()) g.grad_bt += results[p].grad_bt;
  }
  return g;
}

ShardGradient shard_gradient(const CoocStats& stats, const EmbeddingPair& emb,
                             const Block& block, const LossSpec& spec) {
  return shard_gradient(stats, emb, block, LossKernel(stats, spec));
}

FullGradient full_gradient(const CoocStats& stats, const EmbeddingPair& emb,
                           const ShardPlan& plan, const LossKernel& kernel,
                           const ShardOptions& options) {
  FullGradient full;
  full.grad_T = RowMatrixD::Zero(emb.terms(), emb.dim());
  full.grad_C = Eigen::MatrixXd::Zero(emb.dim(), emb.contexts());
  if (emb.has_biases()) {
    full.grad_b = Eigen::VectorXd::Zero(emb.terms());
    full.grad_bt = Eigen::VectorXd::Zero(emb.contexts());
  }
  for (const auto& block : plan.blocks) {
    const auto g = shard_gradient(stats, emb, block, kernel, options);
    full.grad_T.middleRows(block.rows.begin, block.rows.size()) += g.grad_T;
    full.grad_C.middleCols(block.cols.begin, block.cols.size()) += g.grad_C;
    if (emb.has_biases()) {
      full.grad_b.segment(block.rows.begin, block.rows.size()) += g.grad_b;
      full.grad_bt.segment(block.cols.begin, block.cols.size()) += g.grad_bt;
    }
    full.loss += g.loss;
  }
  return full;
}

std::string_view to_string(UpdatePolicy policy) {
  return policy == UpdatePolicy::per_shard ? "per_shard" : "per_epoch";
}

UpdatePolicy parse_update_policy(std::string_view name) {
  if (name == "per_shard") return UpdatePolicy::per_shard;
  if (name == "per_epoch") return UpdatePolicy::per_epoch;
  throw UsageError("unknown update policy '" + std::string(name) +
                   "' (expected per_shard or per_epoch)");
}

OptimizerConfig optimizer_config(const TrainOptions& options, const LossSpec& spec) {
  OptimizerConfig cfg;
  cfg.kind = options.optimizer;
  cfg.learning_rate = options.learning_rate.value_or(spec.default_learning_rate());
  cfg.beta1 = options.beta1;
  cfg.beta2 = options.beta2;
  cfg.epsilon = options.epsilon;
  return cfg;
}

TrainState initial_state(const CoocStats& stats, const LossSpec& spec,
                         const TrainOptions& options) {
  TrainState state;
  state.emb = init_embeddings(stats.vocab_size(), stats.vocab_size(), options.dim,
                              options.seed, spec.has_biases());
  state.optimizer = Optimizer(optimizer_config(options, spec), state.emb).state();
  return state;
}

namespace {

std::span<const double> span_of(const auto& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

bool finite(const ShardGradient& g) {
  return std::isfinite(g.loss) && g.grad_T.allFinite() && g.grad_C.allFinite() &&
         g.grad_b.allFinite() && g.grad_bt.allFinite();
}

std::string where(std::uint32_t epoch, std::size_t shard, const Block& b) {
  std::ostringstream os;
  os << "epoch " << epoch << ", shard " << shard << " (rows " << b.rows.begin << "-"
     << b.rows.end << ", cols " << b.cols.begin << "-" << b.cols.end << ")";
  return os.str();
}

}  // namespace

void train(const CoocStats& stats, const LossSpec& spec, const TrainOptions& options,
           TrainState& state, const EpochCallback& on_epoch) {
  spec.validate();
  if (stats.empty()) throw DataError("cannot train on empty statistics");
  if (state.emb.terms() != stats.vocab_size() || state.emb.contexts() != stats.vocab_size()) {
    throw DataError("embedding shapes do not match the statistics vocabulary");
  }
  if (state.emb.has_biases() != spec.has_biases()) {
    throw DataError("embedding biases do not match the loss");
  }
  const ShardPlan plan = make_shard_plan(stats.vocab_size(), stats.vocab_size(),
                                         options.shard_rows, options.shard_cols);
  const LossKernel kernel(stats, spec);
  const ShardOptions shard_opts{std::max(1u, options.threads), false};
  Optimizer opt(optimizer_config(options, spec), std::move(state.optimizer), state.emb);
  EmbeddingPair& emb = state.emb;

  std::vector<std::size_t> order(plan.blocks.size());
  for (std::uint32_t e = 0; e < options.epochs; ++e) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint32_t epoch = state.epochs_done + 1;
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (options.shuffle_shards) {
      std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                        static_cast<std::uint32_t>(options.seed >> 32), epoch};
      std::mt19937_64 rng(seq);
      std::shuffle(order.begin(), order.end(), rng);
    }

    double loss = 0.0;
    if (options.policy == UpdatePolicy::per_shard) {
      for (std::size_t s : order) {
        const Block& block = plan.blocks[s];
        ShardGradient g;
        try {
          g = shard_gradient(stats, emb, block, kernel, shard_opts);
        } catch (const NumericalError& err) {
          state.optimizer = opt.state();
          throw NumericalError(where(epoch, s, block) + ": " + err.what());
        }
        if (!finite(g)) {
          state.optimizer = opt.state();
          throw NumericalError(where(epoch, s, block) + ": loss or gradient diverged");
        }
        opt.begin_step();
        opt.update_term_rows(emb, block.rows.begin, block.rows.size(), span_of(g.grad_T));
        opt.update_context_cols(emb, block.cols.begin, block.cols.size(), span_of(g.grad_C));
        if (emb.has_biases()) {
          opt.update_term_bias(emb, block.rows.begin, span_of(g.grad_b));
          opt.update_context_bias(emb, block.cols.begin, span_of(g.grad_bt));
        }
        loss += g.loss;
      }
    } else {
      FullGradient g;
      try {
        g = full_gradient(stats, emb, plan, kernel, shard_opts);
      } catch (const NumericalError& err) {
        state.optimizer = opt.state();
        throw NumericalError("epoch " + std::to_string(epoch) + ": " + err.what());
      }
      if (!std::isfinite(g.loss) || !g.grad_T.allFinite() || !g.grad_C.allFinite()) {
        state.optimizer = opt.state();
        throw NumericalError("epoch " + std::to_string(epoch) + ": loss or gradient diverged");
      }
      opt.begin_step();
      opt.update_term_rows(emb, 0, static_cast<std::size_t>(emb.terms()), span_of(g.grad_T));
      opt.update_context_cols(emb, 0, static_cast<std::size_t>(emb.contexts()),
                              span_of(g.grad_C));
      if (emb.has_biases()) {
        opt.update_term_bias(emb, 0, span_of(g.grad_b));
        opt.update_context_bias(emb, 0, span_of(g.grad_bt));
      }
      loss = g.loss;
    }
    if (!emb.all_finite()) {
      state.optimizer = opt.state();
      throw NumericalError("epoch " + std::to_string(epoch) +
                           ": parameters became non-finite after the update");
    }

    state.loss_trace.push_back(loss);
    state.epochs_done = epoch;
    state.optimizer = opt.state();
    if (on_epoch) {
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      on_epoch({epoch, loss, secs}, state);
    }
  }
  state.optimizer = opt.state();
}

TrainState train(const CoocStats& stats, const LossSpec& spec, const TrainOptions& options) {
  TrainState state = initial_state(stats, spec, options);
  train(stats, spec, options, state);
  return state;
}

}  // namespace pmifact
