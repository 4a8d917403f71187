#include "pmifact/embeddings.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "pmifact/error.hpp"

namespace pmifact {

bool EmbeddingPair::all_finite() const {
  return T.allFinite() && C.allFinite() && b.allFinite() && b_tilde.allFinite();
}

bool EmbeddingPair::operator==(const EmbeddingPair& o) const {
  auto same = [](const auto& x, const auto& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
  };
  return same(T, o.T) && same(C, o.C) && same(b, o.b) && same(b_tilde, o.b_tilde);
}

EmbeddingPair init_embeddings(std::size_t terms, std::size_t contexts, std::size_t dim,
                              std::uint64_t seed, bool biases) {
  if (dim == 0) throw UsageError("embedding dimension must be at least 1");
  const auto d = static_cast<Eigen::Index>(dim);
  const float half = 0.5f / static_cast<float>(dim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-half, half);

  EmbeddingPair emb;
  emb.T.resize(static_cast<Eigen::Index>(terms), d);
  emb.C.resize(d, static_cast<Eigen::Index>(contexts));
  // Both are filled in storage order.
  for (Eigen::Index k = 0; k < emb.T.size(); ++k) emb.T.data()[k] = u(rng);
  for (Eigen::Index k = 0; k < emb.C.size(); ++k) emb.C.data()[k] = u(rng);
  if (biases) {
    emb.b = Eigen::VectorXf::Zero(static_cast<Eigen::Index>(terms));
    emb.b_tilde = Eigen::VectorXf::Zero(static_cast<Eigen::Index>(contexts));
  }
  return emb;
}

std::string_view to_string(ExportMode mode) {
  switch (mode) {
    case ExportMode::term: return "term";
    case ExportMode::context: return "context";
    case ExportMode::average: return "average";
  }
  return "unknown";
}

ExportMode parse_export_mode(std::string_view name) {
  if (name == "term") return ExportMode::term;
  if (name == "context") return ExportMode::context;
  if (name == "average") return ExportMode::average;
  throw UsageError("unknown export mode '" + std::string(name) +
                   "' (expected term, context or average)");
}

ExportMode default_export_mode(LossKind kind) {
  return kind == LossKind::mf_glove ? ExportMode::average : ExportMode::term;
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> tokens, Matrix vectors)
    : tokens_(std::move(tokens)), vectors_(std::move(vectors)) {
  if (static_cast<Eigen::Index>(tokens_.size()) != vectors_.rows()) {
    throw DataError("embedding table: " + std::to_string(tokens_.size()) +
                    " tokens for " + std::to_string(vectors_.rows()) + " rows");
  }
  if (!vectors_.allFinite()) throw DataError("embedding table contains NaN or inf");
  index_.reserve(tokens_.size());
  for (std::size_t r = 0; r < tokens_.size(); ++r) {
    for (char& c : tokens_[r]) {
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    index_.emplace(tokens_[r], r);
  }
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view token) const {
  std::string key(token);
  for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingTable export_embeddings(const EmbeddingPair& emb, const Vocabulary& vocab,
                                 ExportMode mode) {
  const auto n = static_cast<Eigen::Index>(vocab.size());
  EmbeddingTable::Matrix out;
  switch (mode) {
    case ExportMode::term:
      if (emb.terms() != n) throw DataError("vocabulary does not match term matrix");
      out = emb.T;
      break;
    case ExportMode::context:
      if (emb.contexts() != n) throw DataError("vocabulary does not match context matrix");
      out = emb.C.transpose();
      break;
    case ExportMode::average:
      if (emb.terms() != emb.contexts()) {
        throw UsageError("average export needs term and context vocabularies to match");
      }
      if (emb.terms() != n) throw DataError("vocabulary does not match term matrix");
      out = (emb.T + emb.C.transpose()) * 0.5f;
      break;
  }
  return EmbeddingTable(vocab.tokens(), std::move(out));
}

void write_embedding_text(const std::filesystem::path& path, const EmbeddingTable& table) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw DataError("cannot write embeddings: " + path.string());
  std::fprintf(f, "%zu %ld\n", table.size(), static_cast<long>(table.dim()));
  const auto& m = table.vectors();
  for (std::size_t r = 0; r < table.size(); ++r) {
    std::fputs(table.token(r).c_str(), f);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::fprintf(f, " %.6g", static_cast<double>(m(static_cast<Eigen::Index>(r), c)));
    }
    std::fputc('\n', f);
  }
  const bool ok = std::ferror(f) == 0;
  if (std::fclose(f) != 0 || !ok) throw DataError("write failed: " + path.string());
}

EmbeddingTable read_embedding_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embeddings: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  long rows = 0, dim = 0;
  if (std::sscanf(line.c_str(), "%ld %ld", &rows, &dim) != 2 || rows < 0 || dim < 1) {
    throw DataError(path.string() + ": bad header, expected '<size> <d>'");
  }
  std::vector<std::string> tokens;
  tokens.reserve(static_cast<std::size_t>(rows));
  EmbeddingTable::Matrix m(rows, dim);
  for (long r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) {
      throw DataError(path.string() + ": expected " + std::to_string(rows) + " rows");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const char* p = line.data();
    const char* end = p + line.size();
    const char* sp = std::find(p, end, ' ');
    tokens.emplace_back(p, sp);
    p = sp;
    for (long c = 0; c < dim; ++c) {
      while (p < end && *p == ' ') ++p;
      float v = 0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw DataError(path.string() + ":" + std::to_string(r + 2) + ": bad number");
      }
      m(r, c) = v;
      p = next;
    }
    while (p < end && *p == ' ') ++p;
    if (p != end) {
      throw DataError(path.string() + ":" + std::to_string(r + 2) +
                      ": more values than the header dimension");
    }
  }
  return EmbeddingTable(std::move(tokens), std::move(m));
}

}  // namespace pmifact
