#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pmifact {

using TokenId = std::uint32_t;

// Marker for out-of-vocabulary positions in an encoded document.
inline constexpr std::int32_t kOutOfVocabulary = -1;

// Lowercases ASCII letters and splits on whitespace. Bytes >= 0x80 pass
// through untouched, so UTF-8 text survives intact.
std::vector<std::string> tokenize(std::string_view line);

struct DocumentFormat {
  // A line equal to this (after trimming) ends a document, in addition to
  // blank lines. Empty means blank lines only.
  std::string delimiter;
};

// Streams every document of every file, in file order. Each file starts a
// new document. Documents with no tokens are never reported.
void for_each_document(
    std::span<const std::filesystem::path> files, const DocumentFormat& format,
    const std::function<void(std::vector<std::string>&&)>& visit);

// Same, over an in-memory text.
void for_each_document(
    std::string_view text, const DocumentFormat& format,
    const std::function<void(std::vector<std::string>&&)>& visit);

class Vocabulary {
 public:
  Vocabulary() = default;

  // tokens must be unique and ordered by non-increasing count.
  Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> counts,
             std::size_t max_size);

  std::size_t size() const { return tokens_.size(); }
  std::size_t max_size() const { return max_size_; }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::uint64_t count(TokenId id) const { return counts_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  std::optional<TokenId> find(std::string_view token) const;

  // Sum of the counts of in-vocabulary tokens.
  std::uint64_t total_count() const { return total_; }

  // count(id) / total_count(); what the undersampling rule calls f_i.
  double frequency(TokenId id) const;

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && counts_ == other.counts_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, TokenId> index_;
  std::size_t max_size_ = 0;
  std::uint64_t total_ = 0;
};

// Accumulates raw token counts; keeps first-occurrence order so ties are
// broken deterministically.
class VocabularyBuilder {
 public:
  void add(std::string_view token);
  void add(std::span<const std::string> tokens);

  std::uint64_t tokens_seen() const { return seen_; }

  // Keeps the max_size most frequent tokens having count >= min_count.
  // Throws UsageError for max_size == 0, DataError when nothing was seen or
  // nothing survives the cutoff.
  Vocabulary build(std::size_t max_size, std::uint64_t min_count) const;

 private:
  struct Entry {
    std::uint64_t count = 0;
    std::uint64_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry> entries_;
  std::uint64_t seen_ = 0;
};

Vocabulary build_vocabulary(std::span<const std::string> tokens,
                            std::size_t max_size, std::uint64_t min_count);

Vocabulary build_vocabulary(std::span<const std::filesystem::path> files,
                            const DocumentFormat& format, std::size_t max_size,
                            std::uint64_t min_count);

// "token<TAB>count" per line, in index order.
void write_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);
Vocabulary read_vocabulary(const std::filesystem::path& path);

}  // namespace pmifact
