#include "pmifact/cooc_stats.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>

#include "pmifact/error.hpp"

namespace pmifact {

CoocStats::CoocStats(std::uint32_t vocab_size, std::vector<CoocTriple> triples,
                     StatsMeta meta)
    : vocab_size_(vocab_size), meta_(meta) {
  if (!(meta_.alpha > 0.0 && meta_.alpha <= 1.0)) {
    throw DataError("co-occurrence stats: alpha must lie in (0, 1]");
  }
  row_ptr_.assign(std::size_t{vocab_size} + 1, 0);
  cols_.reserve(triples.size());
  values_.reserve(triples.size());
  ni_.assign(vocab_size, 0.0);
  nj_.assign(vocab_size, 0.0);

  for (std::size_t k = 0; k < triples.size(); ++k) {
    const auto& t = triples[k];
    if (t.row >= vocab_size || t.col >= vocab_size) {
      throw DataError("co-occurrence entry (" + std::to_string(t.row) + ", " +
                      std::to_string(t.col) + ") outside vocabulary of size " +
                      std::to_string(vocab_size));
    }
    if (!(t.value > 0.0) || !std::isfinite(t.value)) {
      throw DataError("co-occurrence entries must be positive and finite");
    }
    if (k > 0) {
      const auto& p = triples[k - 1];
      if (p.row > t.row || (p.row == t.row && p.col >= t.col)) {
        throw DataError("co-occurrence entries are not in canonical order");
      }
    }
    ++row_ptr_[t.row + 1];
    cols_.push_back(t.col);
    values_.push_back(t.value);
    ni_[t.row] += t.value;
    nj_[t.col] += t.value;
    n_total_ += t.value;
  }
  for (std::size_t i = 0; i < vocab_size; ++i) row_ptr_[i + 1] += row_ptr_[i];
  nj_alpha_ = smoothed_contexts(meta_.alpha);
}

double CoocStats::nij(TokenId i, TokenId j) const {
  const auto cols = row_cols(i);
  auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return values_[row_ptr_[i] + static_cast<std::size_t>(it - cols.begin())];
}

std::vector<double> CoocStats::smoothed_contexts(double alpha) const {
  std::vector<double> out(nj_.size(), 0.0);
  double norm = 0.0;
  for (std::size_t j = 0; j < nj_.size(); ++j) {
    out[j] = nj_[j] > 0.0 ? std::pow(nj_[j], alpha) : 0.0;
    norm += out[j];
  }
  if (norm > 0.0) {
    for (double& v : out) v /= norm;
  }
  return out;
}

std::span<const TokenId> CoocStats::row_cols(TokenId i) const {
  if (i >= vocab_size_) throw DataError("row index out of range");
  return {cols_.data() + row_ptr_[i], cols_.data() + row_ptr_[i + 1]};
}

std::span<const double> CoocStats::row_values(TokenId i) const {
  if (i >= vocab_size_) throw DataError("row index out of range");
  return {values_.data() + row_ptr_[i], values_.data() + row_ptr_[i + 1]};
}

std::vector<CoocTriple> CoocStats::triples() const {
  std::vector<CoocTriple> out;
  out.reserve(nnz());
  for (TokenId i = 0; i < vocab_size_; ++i) {
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      out.push_back({i, cols_[k], values_[k]});
    }
  }
  return out;
}

CoocStats accumulate(std::span<const CoocEvent> events, std::uint32_t vocab_size,
                     StatsMeta meta) {
  struct Keyed {
    std::uint64_t key;
    double weight;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(events.size());
  for (const auto& e : events) {
    if (e.term >= vocab_size || e.context >= vocab_size) {
      throw DataError("event (" + std::to_string(e.term) + ", " +
                      std::to_string(e.context) + ") outside vocabulary of size " +
                      std::to_string(vocab_size));
    }
    keyed.push_back({(std::uint64_t{e.term} << 32) | e.context, e.weight});
  }
  // Stable, so equal pairs are summed in stream order.
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const Keyed& a, const Keyed& b) { return a.key < b.key; });
  std::vector<CoocTriple> triples;
  for (std::size_t k = 0; k < keyed.size();) {
    double sum = 0.0;
    const auto key = keyed[k].key;
    for (; k < keyed.size() && keyed[k].key == key; ++k) sum += keyed[k].weight;
    if (sum > 0.0) {
      triples.push_back({static_cast<TokenId>(key >> 32),
                         static_cast<TokenId>(key & 0xffffffffu), sum});
    }
  }
  return CoocStats(vocab_size, std::move(triples), meta);
}

namespace {

void require_marginals(const CoocStats& stats, TokenId i, TokenId j) {
  if (i >= stats.vocab_size() || j >= stats.vocab_size()) {
    throw DataError("pmi: index out of range");
  }
  if (stats.row_marginal(i) <= 0.0 || stats.col_marginal(j) <= 0.0) {
    throw DataError("pmi undefined: zero marginal for pair (" + std::to_string(i) +
                    ", " + std::to_string(j) + ")");
  }
}

}  // namespace

double pmi(const CoocStats& stats, TokenId i, TokenId j) {
  require_marginals(stats, i, j);
  const double nij = stats.nij(i, j);
  if (nij == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(stats.n_total() * nij /
                  (stats.row_marginal(i) * stats.col_marginal(j)));
}

double smoothed_pmi(const CoocStats& stats, TokenId i, TokenId j, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw UsageError("smoothing exponent must lie in (0, 1]");
  }
  if (alpha == 1.0) return pmi(stats, i, j);
  require_marginals(stats, i, j);
  const double nij = stats.nij(i, j);
  if (nij == 0.0) return -std::numeric_limits<double>::infinity();
  const double pj = alpha == stats.alpha() ? stats.smoothed_context(j)
                                           : stats.smoothed_contexts(alpha)[j];
  // p_ij / (p_i p^a_j) with p_ij = N_ij / N and p_i = N_i / N.
  return std::log(nij / (stats.row_marginal(i) * pj));
}

namespace {

constexpr std::array<char, 5> kMagic = {'C', 'O', 'O', 'C', '1'};
constexpr std::size_t kHeaderBytes = 5 + 4 + 4 + 1 + 8 + 8;
constexpr std::size_t kTripleBytes = 4 + 4 + 8;

template <class T>
void put_le(std::string& buf, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                  std::uint8_t>>;
  auto bits = std::bit_cast<U>(value);
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    buf.push_back(static_cast<char>(bits & 0xffu));
    if constexpr (sizeof(T) > 1) bits >>= 8;
  }
}

template <class T>
T get_le(const unsigned char* p) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                  std::uint8_t>>;
  U bits = 0;
  for (std::size_t b = sizeof(T); b-- > 0;) {
    bits = static_cast<U>((bits << (sizeof(T) > 1 ? 8 : 0)) | p[b]);
  }
  return std::bit_cast<T>(bits);
}

}  // namespace

void write_cooc_binary(const std::filesystem::path& path, const CoocStats& stats) {
  std::string buf;
  buf.reserve(kHeaderBytes + stats.nnz() * kTripleBytes);
  buf.append(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(buf, stats.vocab_size());
  put_le<std::uint32_t>(buf, stats.meta().window);
  put_le<std::uint8_t>(buf, static_cast<std::uint8_t>(stats.meta().weighting));
  put_le<double>(buf, stats.meta().alpha);
  put_le<double>(buf, stats.n_total());
  for (TokenId i = 0; i < stats.vocab_size(); ++i) {
    const auto cols = stats.row_cols(i);
    const auto vals = stats.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      put_le<std::uint32_t>(buf, i);
      put_le<std::uint32_t>(buf, cols[k]);
      put_le<double>(buf, vals[k]);
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write co-occurrence file: " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

CoocStats read_cooc_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open co-occurrence file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < kHeaderBytes ||
      std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw DataError(path.string() + ": not a COOC1 file");
  }
  const unsigned char* p = bytes.data() + kMagic.size();
  const auto vocab_size = get_le<std::uint32_t>(p);
  StatsMeta meta;
  meta.window = get_le<std::uint32_t>(p + 4);
  const auto weighting = get_le<std::uint8_t>(p + 8);
  if (weighting > 2) throw DataError(path.string() + ": unknown weighting code");
  meta.weighting = static_cast<Weighting>(weighting);
  meta.alpha = get_le<double>(p + 9);
  const double n_header = get_le<double>(p + 17);

  const std::size_t body = bytes.size() - kHeaderBytes;
  if (body % kTripleBytes != 0) {
    throw DataError(path.string() + ": truncated triple section");
  }
  std::vector<CoocTriple> triples(body / kTripleBytes);
  const unsigned char* q = bytes.data() + kHeaderBytes;
  for (auto& t : triples) {
    t.row = get_le<std::uint32_t>(q);
    t.col = get_le<std::uint32_t>(q + 4);
    t.value = get_le<double>(q + 8);
    q += kTripleBytes;
  }
  CoocStats stats(vocab_size, std::move(triples), meta);
  if (std::abs(stats.n_total() - n_header) >
      1e-9 * std::max(1.0, std::abs(n_header))) {
    throw DataError(path.string() + ": header N disagrees with the stored counts");
  }
  return stats;
}

void write_cooc_text(const std::filesystem::path& path, const CoocStats& stats) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write co-occurrence text: " + path.string());
  out << std::setprecision(17);
  for (TokenId i = 0; i < stats.vocab_size(); ++i) {
    const auto cols = stats.row_cols(i);
    const auto vals = stats.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      out << i << '\t' << cols[k] << '\t' << vals[k] << '\n';
    }
  }
}

}  // namespace pmifact
