#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "pmifact/cooc_stats.hpp"
#include "pmifact/corpus.hpp"
#include "pmifact/window.hpp"

namespace pmifact {

// Exact pair counter. Window weights are kept as integer multiples of
// 1 / WindowConfig::integer_scale(), so partial counters merge by integer
// addition: the result does not depend on how the corpus was chunked or in
// which order chunks were merged.
//
// Pairs go into an append buffer that is periodically sorted and reduced into
// sorted runs; runs of similar size are merged as they pile up.
class CoocCounter {
 public:
  explicit CoocCounter(std::uint32_t vocab_size,
                       std::size_t buffer_pairs = std::size_t{1} << 22);

  std::uint32_t vocab_size() const { return vocab_size_; }

  void add(TokenId term, TokenId context, std::uint64_t scaled_weight) {
    buffer_.push_back({key(term, context), scaled_weight});
    if (buffer_.size() >= buffer_limit_) flush();
  }

  // Adds every window pair of one encoded document.
  void add_document(const EventStreamer& streamer,
                    std::span<const std::int32_t> ids);

  void merge(CoocCounter&& other);

  // Distinct pairs seen so far (forces a full reduction).
  std::size_t distinct_pairs();

  // N_ij = scaled / scale * r_i * r_j. retention may be empty (all ones).
  CoocStats finalize(std::uint64_t scale, std::span<const double> retention,
                     StatsMeta meta) &&;

 private:
  struct Entry {
    std::uint64_t key;
    std::uint64_t count;
  };
  using Run = std::vector<Entry>;

  static std::uint64_t key(TokenId i, TokenId j) {
    return (std::uint64_t{i} << 32) | j;
  }

  void flush();
  void push_run(Run run);
  void collapse();
  static Run merge_runs(const Run& a, const Run& b);

  std::uint32_t vocab_size_;
  std::size_t buffer_limit_;
  std::vector<Entry> buffer_;
  std::vector<Run> runs_;
};

struct CountSummary {
  std::uint64_t documents = 0;
  std::uint64_t tokens = 0;
  std::uint64_t skipped_tokens = 0;
};

// Counts every corpus file against a fixed vocabulary. Documents are handed
// out in chunks to `threads` workers (0 = hardware concurrency); the result is
// identical for any thread count.
CoocStats count_cooccurrences(std::span<const std::filesystem::path> files,
                              const DocumentFormat& format, const Vocabulary& vocab,
                              const WindowConfig& window, double alpha,
                              unsigned threads = 1, CountSummary* summary = nullptr);

// Same over an in-memory text, single-threaded.
CoocStats count_cooccurrences(std::string_view text, const DocumentFormat& format,
                              const Vocabulary& vocab, const WindowConfig& window,
                              double alpha, CountSummary* summary = nullptr);

}  // namespace pmifact
