#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pmifact/corpus.hpp"
#include "pmifact/window.hpp"

namespace pmifact {

struct CoocTriple {
  TokenId row = 0;
  TokenId col = 0;
  double value = 0.0;

  bool operator==(const CoocTriple&) const = default;
};

// Provenance carried through the COOC1 header.
struct StatsMeta {
  std::uint32_t window = 0;
  Weighting weighting = Weighting::flat;
  // Context smoothing exponent whose normalized weights are cached.
  double alpha = 0.75;
};

// Sparse weighted co-occurrence counts N_ij with their marginals.
//
// Storage is CSR in canonical order (rows ascending, columns ascending within
// a row), only strictly positive entries. Marginals and N are recomputed from
// the entries in that order, so two equal entry lists give bit-identical
// marginals. Immutable once built; concurrent reads need no locking.
class CoocStats {
 public:
  CoocStats() = default;

  // triples must be canonical, unique, in range and strictly positive;
  // DataError otherwise.
  CoocStats(std::uint32_t vocab_size, std::vector<CoocTriple> triples,
            StatsMeta meta);

  std::uint32_t vocab_size() const { return vocab_size_; }
  std::size_t nnz() const { return cols_.size(); }
  const StatsMeta& meta() const { return meta_; }
  double alpha() const { return meta_.alpha; }

  double n_total() const { return n_total_; }
  double row_marginal(TokenId i) const { return ni_.at(i); }
  double col_marginal(TokenId j) const { return nj_.at(j); }
  const std::vector<double>& row_marginals() const { return ni_; }
  const std::vector<double>& col_marginals() const { return nj_; }

  // N_ij, zero when the pair was never observed.
  double nij(TokenId i, TokenId j) const;

  // Smoothed context probability N_j^alpha / sum_c N_c^alpha for the cached
  // alpha.
  double smoothed_context(TokenId j) const { return nj_alpha_.at(j); }
  const std::vector<double>& smoothed_contexts() const { return nj_alpha_; }

  // Same, for an arbitrary alpha (O(|V|), not cached).
  std::vector<double> smoothed_contexts(double alpha) const;

  std::span<const TokenId> row_cols(TokenId i) const;
  std::span<const double> row_values(TokenId i) const;

  std::vector<CoocTriple> triples() const;

  bool empty() const { return cols_.empty(); }

 private:
  std::uint32_t vocab_size_ = 0;
  StatsMeta meta_;
  std::vector<std::uint64_t> row_ptr_;
  std::vector<TokenId> cols_;
  std::vector<double> values_;
  std::vector<double> ni_;
  std::vector<double> nj_;
  std::vector<double> nj_alpha_;
  double n_total_ = 0.0;
};

// Sums event weights per (term, context) pair. Ids must be < vocab_size.
CoocStats accumulate(std::span<const CoocEvent> events, std::uint32_t vocab_size,
                     StatsMeta meta);

// log(N N_ij / (N_i N_j)); -infinity when N_ij = 0. DataError when either
// marginal is zero.
double pmi(const CoocStats& stats, TokenId i, TokenId j);

// log(p_ij / (p_i p^alpha_j)); equals pmi() for alpha = 1.
double smoothed_pmi(const CoocStats& stats, TokenId i, TokenId j, double alpha);

// Binary COOC1 file (little-endian): "COOC1", vocab_size u32, window u32,
// weighting u8, alpha f64, N f64, then {i u32, j u32, nij f64} triples in
// canonical order until end of file.
void write_cooc_binary(const std::filesystem::path& path, const CoocStats& stats);
CoocStats read_cooc_binary(const std::filesystem::path& path);

// "i<TAB>j<TAB>nij" per line, canonical order, for debugging.
void write_cooc_text(const std::filesystem::path& path, const CoocStats& stats);

}  // namespace pmifact
