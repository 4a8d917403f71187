#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pmifact/embeddings.hpp"

namespace pmifact {

// u.v / (|u| |v|). DataError for a zero vector or mismatched lengths.
double cosine(std::span<const float> u, std::span<const float> v);
double cosine(std::span<const double> u, std::span<const double> v);

// 1-based ranks, tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of the average ranks. DataError for fewer than two
// values or when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

double pearson(std::span<const double> x, std::span<const double> y);

struct SimilarityPair {
  std::string a;
  std::string b;
  double gold = 0.0;
};

struct SimilarityDataset {
  std::string name;
  std::vector<SimilarityPair> pairs;
};

struct AnalogyQuad {
  std::string a, a_star, b, b_star;
};

struct AnalogyDataset {
  std::string name;
  std::vector<AnalogyQuad> quads;
};

// "word_a<TAB>word_b<TAB>score" per line; blank lines and '#' comments are
// skipped. Words are lowercased. The name defaults to the file stem.
SimilarityDataset load_similarity_dataset(const std::filesystem::path& path,
                                          std::string name = {});

// "a a* b b*" per line; lines starting with ':' are section headers.
AnalogyDataset load_analogy_dataset(const std::filesystem::path& path,
                                    std::string name = {});

struct SimilarityResult {
  double rho = 0.0;
  std::size_t kept = 0;
  std::size_t total = 0;
  double coverage() const { return total ? double(kept) / double(total) : 0.0; }
};

// Cosine model scores against gold scores over the pairs whose words are both
// in the table. DataError "insufficient coverage" below two kept pairs.
SimilarityResult spearman_eval(const EmbeddingTable& table, const SimilarityDataset& data);

enum class AnalogyMethod { add, mul };

std::string_view to_string(AnalogyMethod method);

inline constexpr double kAnalogyEpsilon = 0.001;

// Unit-normalized copy of a table for repeated analogy queries. Candidates
// exclude the three query words and rows of zero norm; ties go to the lower
// row index. 3CosMul shifts cosines to (cos + 1) / 2.
class AnalogySolver {
 public:
  explicit AnalogySolver(const EmbeddingTable& table, double epsilon = kAnalogyEpsilon);

  const EmbeddingTable& table() const { return *table_; }

  // Row of the predicted b*. DataError when a query word is out of
  // vocabulary or has a zero vector.
  std::size_t solve(std::string_view a, std::string_view a_star, std::string_view b,
                    AnalogyMethod method) const;
  std::size_t solve(std::size_t a, std::size_t a_star, std::size_t b,
                    AnalogyMethod method) const;

  // Same for many queries at once, one matrix product per batch.
  // Each entry of rows is {a, a*, b}; returns {3CosAdd, 3CosMul} per query.
  std::vector<std::pair<std::size_t, std::size_t>> solve_batch(
      std::span<const std::array<std::size_t, 3>> rows) const;

 private:
  std::size_t lookup(std::string_view word) const;
  std::size_t argmax(const float* ca, const float* cas, const float* cb, std::size_t a,
                     std::size_t a_star, std::size_t b, AnalogyMethod method) const;

  const EmbeddingTable* table_;
  EmbeddingTable::Matrix unit_;
  std::vector<bool> usable_;
  double epsilon_;
};

std::string analogy_3cosmul(const EmbeddingTable& table, std::string_view a,
                            std::string_view a_star, std::string_view b,
                            double epsilon = kAnalogyEpsilon);
std::string analogy_3cosadd(const EmbeddingTable& table, std::string_view a,
                            std::string_view a_star, std::string_view b);

struct AnalogyResult {
  std::size_t correct_add = 0;
  std::size_t correct_mul = 0;
  std::size_t attempted = 0;
  std::size_t total = 0;
  double accuracy(AnalogyMethod m) const {
    const auto c = m == AnalogyMethod::add ? correct_add : correct_mul;
    return attempted ? double(c) / double(attempted) : 0.0;
  }
  double coverage() const { return total ? double(attempted) / double(total) : 0.0; }
};

// Quads with any out-of-vocabulary word are skipped and count against
// coverage only.
AnalogyResult analogy_eval(const EmbeddingTable& table, const AnalogyDataset& data,
                           double epsilon = kAnalogyEpsilon);

// tt_*: term against term vectors; tc_*: term vector of the query against the
// context vectors of the candidates.
enum class Geometry { tt_cos, tt_dot, tc_dot, tc_cos };

std::string_view to_string(Geometry geometry);
Geometry parse_geometry(std::string_view name);

struct Neighbor {
  std::size_t row = 0;
  std::string token;
  double score = 0.0;
};

// Top-n by score, excluding the query word, ties by lower row. contexts must
// be given for tc_* geometries (UsageError otherwise) and share the term
// table's vocabulary. DataError when the word is unknown.
std::vector<Neighbor> neighbors(const EmbeddingTable& terms, const EmbeddingTable* contexts,
                                std::string_view word, Geometry geometry, std::size_t top_n);

// One line per evaluated dataset: name, metric, value, coverage. A failed
// evaluation keeps its row with value "ERROR".
struct ReportRow {
  std::string name;
  std::string metric;
  std::optional<double> value;
  double coverage = 0.0;
};

void write_report_csv(std::ostream& out, std::span<const ReportRow> rows);

}  // namespace pmifact
