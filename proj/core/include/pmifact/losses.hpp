#pragma once

#include <algorithm>
#include <cmath>
#include <string_view>
#include <vector>

#include "pmifact/cooc_stats.hpp"

namespace pmifact {

enum class LossKind { mf_sgns, mf_glove, hilbert_mle };

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

struct LossSpec {
  LossKind kind = LossKind::hilbert_mle;
  double k = 15.0;              // negative samples
  double alpha_smooth = 0.75;   // context smoothing for the negative term
  double x_max = 100.0;         // GloVe weighting cap
  double glove_alpha = 0.75;    // GloVe weighting exponent
  double tau = 2.0;             // Hilbert-MLE temperature
  double dot_clamp = 80.0;      // |dot| bound before exponentiation

  void validate() const;

  // Learning rates the three models were tuned to with Adam:
  // 0.0005, 0.005 and 1.0.
  double default_learning_rate() const;

  bool has_biases() const { return kind == LossKind::mf_glove; }

  // GloVe only ever looks at observed cells.
  bool sparse() const { return kind == LossKind::mf_glove; }

  bool operator==(const LossSpec&) const = default;
};

struct CellGradient {
  double delta = 0.0;  // d loss / d dot (also the bias gradient for GloVe)
  double loss = 0.0;
};

// Analytic per-cell optimum. visited is false for cells the loss never
// touches (GloVe cells with N_ij = 0), whose value is -infinity.
struct Target {
  double value = 0.0;
  bool visited = true;
};

// (N_ij + N-_ij) sigma(dot) - N_ij with N-_ij = k N_i p^alpha_j.
// Loss: N_ij softplus(-dot) + N-_ij softplus(dot).
CellGradient sgns_delta(const CoocStats& stats, TokenId i, TokenId j, double dot,
                        const LossSpec& spec);

// 2 h(N_ij) (dot + b_i + b_j - log N_ij); loss h(N_ij) residual^2.
// DataError when N_ij = 0.
CellGradient glove_delta(const CoocStats& stats, TokenId i, TokenId j, double dot,
                         double b_i, double b_j, const LossSpec& spec);

// (p_i p_j)^(1/tau) (e^dot - e^PMI), e^PMI taken as 0 for unseen pairs.
// The reported loss is the matching integral
//   (p_i p_j)^(1/tau) (e^dot - e^PMI - e^PMI (dot - PMI)),
// zero at the optimum; for unseen pairs it is (p_i p_j)^(1/tau) e^dot.
// The true likelihood gradient carries an extra 1 / (1 - p_ij) factor that is
// dropped here; p_ij is tiny for every realistic cell.
CellGradient mle_delta(const CoocStats& stats, TokenId i, TokenId j, double dot,
                       const LossSpec& spec);

// PMI_alpha - log k, log N_ij, or PMI, per loss kind.
Target phi(const CoocStats& stats, TokenId i, TokenId j, const LossSpec& spec);

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow.
inline double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double glove_weight(double nij, double x_max, double exponent) {
  return nij >= x_max ? 1.0 : std::pow(nij / x_max, exponent);
}

// Cell formulas in terms of precomputed factors.
inline CellGradient sgns_cell(double nij, double neg, double dot) {
  const double delta = (nij + neg) * sigmoid(dot) - nij;
  const double loss = (nij > 0 ? nij * softplus(-dot) : 0.0) + neg * softplus(dot);
  return {delta, loss};
}

inline CellGradient glove_cell(double nij, double dot, double b_i, double b_j,
                               const LossSpec& spec) {
  const double h = glove_weight(nij, spec.x_max, spec.glove_alpha);
  const double r = dot + b_i + b_j - std::log(nij);
  return {2.0 * h * r, h * r * r};
}

// m is the (p_i p_j)^(1/tau) multiplier, e_pmi = N N_ij / (N_i N_j).
inline CellGradient mle_cell(double e_pmi, double m, double dot, double clamp) {
  const double x = std::clamp(dot, -clamp, clamp);
  const double e = std::exp(x);
  if (e_pmi <= 0) return {m * e, m * e};
  const double u = x - std::log(e_pmi);
  // e^phi (e^u - 1 - u), accurate near u = 0.
  return {m * (e - e_pmi), m * e_pmi * (std::expm1(u) - u)};
}

// Per-row and per-column factors hoisted out of the training loop.
class LossKernel {
 public:
  LossKernel(const CoocStats& stats, const LossSpec& spec);

  const LossSpec& spec() const { return spec_; }

  // nij may be zero except for GloVe, whose caller only visits stored cells.
  CellGradient cell(TokenId i, TokenId j, double nij, double dot, double b_i = 0.0,
                    double b_j = 0.0) const {
    switch (spec_.kind) {
      case LossKind::mf_sgns: return sgns_cell(nij, row_[i] * col_[j], dot);
      case LossKind::mf_glove: return glove_cell(nij, dot, b_i, b_j, spec_);
      case LossKind::hilbert_mle:
        return mle_cell(nij > 0 ? n_total_ * nij / (ni_[i] * nj_[j]) : 0.0,
                        row_[i] * col_[j], dot, spec_.dot_clamp);
    }
    return {};
  }

 private:
  LossSpec spec_;
  // SGNS: k N_i and p^alpha_j. MLE: p_i^(1/tau) and p_j^(1/tau).
  std::vector<double> row_;
  std::vector<double> col_;
  std::vector<double> ni_;
  std::vector<double> nj_;
  double n_total_ = 0.0;
};

}  // namespace pmifact
