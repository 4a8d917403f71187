#include "pmifact/losses.hpp"

#include <limits>
#include <string>

#include "pmifact/error.hpp"

namespace pmifact {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::mf_sgns: return "mf_sgns";
    case LossKind::mf_glove: return "mf_glove";
    case LossKind::hilbert_mle: return "hilbert_mle";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "mf_sgns" || name == "sgns") return LossKind::mf_sgns;
  if (name == "mf_glove" || name == "glove") return LossKind::mf_glove;
  if (name == "hilbert_mle" || name == "mle") return LossKind::hilbert_mle;
  throw UsageError("unknown loss '" + std::string(name) +
                   "' (expected mf_sgns, mf_glove or hilbert_mle)");
}

void LossSpec::validate() const {
  if (!(k >= 1.0)) throw UsageError("k must be at least 1");
  if (!(alpha_smooth > 0.0 && alpha_smooth <= 1.0)) {
    throw UsageError("alpha_smooth must lie in (0, 1]");
  }
  if (!(x_max > 0.0)) throw UsageError("x_max must be positive");
  if (!(glove_alpha > 0.0 && glove_alpha <= 1.0)) {
    throw UsageError("glove_alpha must lie in (0, 1]");
  }
  if (!(tau >= 1.0)) throw UsageError("tau must be at least 1");
  if (!(dot_clamp > 0.0)) throw UsageError("dot_clamp must be positive");
}

double LossSpec::default_learning_rate() const {
  switch (kind) {
    case LossKind::mf_sgns: return 0.0005;
    case LossKind::mf_glove: return 0.005;
    case LossKind::hilbert_mle: return 1.0;
  }
  return 0.0;
}

namespace {

void require_marginals(const CoocStats& stats, TokenId i, TokenId j) {
  if (i >= stats.vocab_size() || j >= stats.vocab_size()) {
    throw DataError("cell (" + std::to_string(i) + ", " + std::to_string(j) +
                    ") outside the statistics");
  }
  if (stats.row_marginal(i) <= 0.0 || stats.col_marginal(j) <= 0.0) {
    throw DataError("cell (" + std::to_string(i) + ", " + std::to_string(j) +
                    ") has a zero marginal");
  }
}

double smoothed_context(const CoocStats& stats, TokenId j, double alpha) {
  return alpha == stats.alpha() ? stats.smoothed_context(j)
                                : stats.smoothed_contexts(alpha)[j];
}

double mle_multiplier(double ni, double nj, double n, double tau) {
  return std::pow(ni / n, 1.0 / tau) * std::pow(nj / n, 1.0 / tau);
}

}  // namespace

CellGradient sgns_delta(const CoocStats& stats, TokenId i, TokenId j, double dot,
                        const LossSpec& spec) {
  require_marginals(stats, i, j);
  const double neg =
      spec.k * stats.row_marginal(i) * smoothed_context(stats, j, spec.alpha_smooth);
  return sgns_cell(stats.nij(i, j), neg, dot);
}

CellGradient glove_delta(const CoocStats& stats, TokenId i, TokenId j, double dot,
                         double b_i, double b_j, const LossSpec& spec) {
  require_marginals(stats, i, j);
  const double nij = stats.nij(i, j);
  if (nij <= 0.0) {
    throw DataError("GloVe loss is undefined on unobserved cell (" +
                    std::to_string(i) + ", " + std::to_string(j) + ")");
  }
  return glove_cell(nij, dot, b_i, b_j, spec);
}

CellGradient mle_delta(const CoocStats& stats, TokenId i, TokenId j, double dot,
                       const LossSpec& spec) {
  require_marginals(stats, i, j);
  const double ni = stats.row_marginal(i);
  const double nj = stats.col_marginal(j);
  const double n = stats.n_total();
  const double nij = stats.nij(i, j);
  return mle_cell(nij > 0 ? n * nij / (ni * nj) : 0.0, mle_multiplier(ni, nj, n, spec.tau),
                  dot, spec.dot_clamp);
}

Target phi(const CoocStats& stats, TokenId i, TokenId j, const LossSpec& spec) {
  require_marginals(stats, i, j);
  switch (spec.kind) {
    case LossKind::mf_sgns:
      return {smoothed_pmi(stats, i, j, spec.alpha_smooth) - std::log(spec.k), true};
    case LossKind::mf_glove: {
      const double nij = stats.nij(i, j);
      if (nij <= 0.0) return {-std::numeric_limits<double>::infinity(), false};
      return {std::log(nij), true};
    }
    case LossKind::hilbert_mle: return {pmi(stats, i, j), true};
  }
  return {};
}

LossKernel::LossKernel(const CoocStats& stats, const LossSpec& spec) : spec_(spec) {
  spec_.validate();
  const std::size_t v = stats.vocab_size();
  n_total_ = stats.n_total();
  ni_ = stats.row_marginals();
  nj_ = stats.col_marginals();
  row_.assign(v, 0.0);
  col_.assign(v, 0.0);
  switch (spec_.kind) {
    case LossKind::mf_sgns: {
      const auto pj = stats.alpha() == spec_.alpha_smooth
                          ? stats.smoothed_contexts()
                          : stats.smoothed_contexts(spec_.alpha_smooth);
      for (std::size_t i = 0; i < v; ++i) row_[i] = spec_.k * ni_[i];
      col_ = pj;
      break;
    }
    case LossKind::hilbert_mle:
      for (std::size_t i = 0; i < v; ++i) {
        row_[i] = n_total_ > 0 ? std::pow(ni_[i] / n_total_, 1.0 / spec_.tau) : 0.0;
        col_[i] = n_total_ > 0 ? std::pow(nj_[i] / n_total_, 1.0 / spec_.tau) : 0.0;
      }
      break;
    case LossKind::mf_glove: break;
  }
}

}  // namespace pmifact
