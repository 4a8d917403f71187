#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "pmifact/corpus.hpp"
#include "pmifact/losses.hpp"

namespace pmifact {

using TermMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ContextMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

// Term vectors are the rows of T (|V_T| x d), context vectors the columns of
// C (d x |V_C|). Both layouts keep one vector contiguous in memory, so a
// shard's rows or columns form a single span.
struct EmbeddingPair {
  TermMatrix T;
  ContextMatrix C;
  Eigen::VectorXf b;        // empty unless the loss has biases
  Eigen::VectorXf b_tilde;  // empty unless the loss has biases

  Eigen::Index dim() const { return T.cols(); }
  Eigen::Index terms() const { return T.rows(); }
  Eigen::Index contexts() const { return C.cols(); }
  bool has_biases() const { return b.size() > 0; }

  bool all_finite() const;
  bool operator==(const EmbeddingPair& other) const;
};

// Entries i.i.d. uniform in [-0.5/d, 0.5/d], drawn T row by row then C column
// by column from one mt19937_64 stream. Biases start at zero.
EmbeddingPair init_embeddings(std::size_t terms, std::size_t contexts, std::size_t dim,
                              std::uint64_t seed, bool biases);

enum class ExportMode { term, context, average };

std::string_view to_string(ExportMode mode);
ExportMode parse_export_mode(std::string_view name);

// Averaged vectors for GloVe, term vectors otherwise.
ExportMode default_export_mode(LossKind kind);

// Word vectors, one row per token, with a lookup by token.
class EmbeddingTable {
 public:
  using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  EmbeddingTable() = default;
  // Tokens are lowercased on the way in; the first occurrence of a token wins.
  EmbeddingTable(std::vector<std::string> tokens, Matrix vectors);

  std::size_t size() const { return tokens_.size(); }
  Eigen::Index dim() const { return vectors_.cols(); }
  const std::string& token(std::size_t row) const { return tokens_.at(row); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const Matrix& vectors() const { return vectors_; }
  Matrix& mutable_vectors() { return vectors_; }
  std::optional<std::size_t> find(std::string_view token) const;

 private:
  std::vector<std::string> tokens_;
  Matrix vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// UsageError for average mode when T and C cover different vocabularies,
// DataError when the vocabulary does not match the matrices.
EmbeddingTable export_embeddings(const EmbeddingPair& emb, const Vocabulary& vocab,
                                 ExportMode mode);

// "<size> <d>" header, then "token v_1 ... v_d" with 6 significant digits.
void write_embedding_text(const std::filesystem::path& path, const EmbeddingTable& table);
EmbeddingTable read_embedding_text(const std::filesystem::path& path);

}  // namespace pmifact
