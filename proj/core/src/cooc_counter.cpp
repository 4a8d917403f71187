#include "pmifact/cooc_counter.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "pmifact/error.hpp"

namespace pmifact {

CoocCounter::CoocCounter(std::uint32_t vocab_size, std::size_t buffer_pairs)
    : vocab_size_(vocab_size), buffer_limit_(std::max<std::size_t>(buffer_pairs, 1)) {
  buffer_.reserve(std::min<std::size_t>(buffer_limit_, std::size_t{1} << 22));
}

void CoocCounter::add_document(const EventStreamer& streamer,
                               std::span<const std::int32_t> ids) {
  const auto& cfg = streamer.config();
  std::uint64_t weights[64];
  const bool small = cfg.width < 64;
  if (small) {
    for (std::uint32_t o = 1; o <= cfg.width; ++o) weights[o] = cfg.integer_weight(o);
  }
  streamer.for_each_pair(ids, [&](TokenId i, TokenId j, std::uint32_t offset) {
    add(i, j, small ? weights[offset] : cfg.integer_weight(offset));
  });
}

void CoocCounter::flush() {
  if (buffer_.empty()) return;
  std::sort(buffer_.begin(), buffer_.end(),
            [](const Entry& a, const Entry& b) { return a.key < b.key; });
  Run run;
  run.reserve(buffer_.size() / 2);
  for (const auto& e : buffer_) {
    if (!run.empty() && run.back().key == e.key) {
      run.back().count += e.count;
    } else {
      run.push_back(e);
    }
  }
  run.shrink_to_fit();
  buffer_.clear();
  push_run(std::move(run));
}

void CoocCounter::push_run(Run run) {
  runs_.push_back(std::move(run));
  // Keep run sizes roughly geometric so total merge work stays n log n.
  while (runs_.size() >= 2 &&
         runs_[runs_.size() - 2].size() <= 2 * runs_.back().size()) {
    Run merged = merge_runs(runs_[runs_.size() - 2], runs_.back());
    runs_.pop_back();
    runs_.back() = std::move(merged);
  }
}

void CoocCounter::collapse() {
  flush();
  while (runs_.size() >= 2) {
    Run merged = merge_runs(runs_[runs_.size() - 2], runs_.back());
    runs_.pop_back();
    runs_.back() = std::move(merged);
  }
}

CoocCounter::Run CoocCounter::merge_runs(const Run& a, const Run& b) {
  Run out;
  out.reserve(a.size() + b.size());
  std::size_t x = 0, y = 0;
  while (x < a.size() && y < b.size()) {
    if (a[x].key < b[y].key) {
      out.push_back(a[x++]);
    } else if (b[y].key < a[x].key) {
      out.push_back(b[y++]);
    } else {
      out.push_back({a[x].key, a[x].count + b[y].count});
      ++x;
      ++y;
    }
  }
  out.insert(out.end(), a.begin() + static_cast<std::ptrdiff_t>(x), a.end());
  out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(y), b.end());
  out.shrink_to_fit();
  return out;
}

void CoocCounter::merge(CoocCounter&& other) {
  if (other.vocab_size_ != vocab_size_) {
    throw UsageError("cannot merge counters over different vocabularies");
  }
  other.collapse();
  if (!other.runs_.empty()) push_run(std::move(other.runs_.back()));
  other.runs_.clear();
}

std::size_t CoocCounter::distinct_pairs() {
  collapse();
  return runs_.empty() ? 0 : runs_.front().size();
}

CoocStats CoocCounter::finalize(std::uint64_t scale, std::span<const double> retention,
                                StatsMeta meta) && {
  if (scale == 0) throw UsageError("counter scale must be positive");
  if (!retention.empty() && retention.size() != vocab_size_) {
    throw UsageError("retention factors do not match the vocabulary");
  }
  collapse();
  std::vector<CoocTriple> triples;
  if (!runs_.empty()) {
    const Run& run = runs_.front();
    triples.reserve(run.size());
    const auto denom = static_cast<double>(scale);
    for (const auto& e : run) {
      const auto i = static_cast<TokenId>(e.key >> 32);
      const auto j = static_cast<TokenId>(e.key & 0xffffffffu);
      double v = static_cast<double>(e.count) / denom;
      if (!retention.empty()) v *= retention[i] * retention[j];
      triples.push_back({i, j, v});
    }
    runs_.clear();
  }
  return CoocStats(vocab_size_, std::move(triples), meta);
}

namespace {

StatsMeta meta_for(const WindowConfig& window, double alpha) {
  return {window.width, window.weighting, alpha};
}

using Chunk = std::vector<std::vector<std::int32_t>>;

// Documents per chunk are bounded by token count so chunks stay cache-sized.
constexpr std::size_t kChunkTokens = std::size_t{1} << 20;

class ChunkQueue {
 public:
  explicit ChunkQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(Chunk chunk) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return queue_.size() < capacity_ || aborted_; });
    if (aborted_) return;
    queue_.push_back(std::move(chunk));
    not_empty_.notify_one();
  }

  std::optional<Chunk> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !queue_.empty() || closed_ || aborted_; });
    if (aborted_ || queue_.empty()) return std::nullopt;
    Chunk c = std::move(queue_.front());
    queue_.pop_front();
    not_full_.notify_one();
    return c;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
  }

  void abort() {
    std::lock_guard lock(mu_);
    aborted_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable not_empty_, not_full_;
  std::deque<Chunk> queue_;
  std::size_t capacity_;
  bool closed_ = false;
  bool aborted_ = false;
};

}  // namespace

CoocStats count_cooccurrences(std::span<const std::filesystem::path> files,
                              const DocumentFormat& format, const Vocabulary& vocab,
                              const WindowConfig& window, double alpha,
                              unsigned threads, CountSummary* summary) {
  const EventStreamer streamer(vocab, window);
  const auto vocab_size = static_cast<std::uint32_t>(vocab.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

  CountSummary local;
  CoocCounter total(vocab_size);

  if (threads == 1) {
    for_each_document(files, format, [&](std::vector<std::string>&& doc) {
      ++local.documents;
      local.tokens += doc.size();
      const auto ids = streamer.encode(doc, &local.skipped_tokens);
      total.add_document(streamer, ids);
    });
  } else {
    ChunkQueue queue(2 * threads);
    std::vector<CoocCounter> counters;
    for (unsigned w = 0; w < threads; ++w) counters.emplace_back(vocab_size);
    std::exception_ptr failure;
    std::mutex failure_mu;
    {
      std::vector<std::jthread> workers;
      for (unsigned w = 0; w < threads; ++w) {
        workers.emplace_back([&, w] {
          try {
            while (auto chunk = queue.pop()) {
              for (const auto& ids : *chunk) counters[w].add_document(streamer, ids);
            }
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
            queue.abort();
          }
        });
      }
      try {
        Chunk chunk;
        std::size_t chunk_tokens = 0;
        for_each_document(files, format, [&](std::vector<std::string>&& doc) {
          ++local.documents;
          local.tokens += doc.size();
          chunk_tokens += doc.size();
          chunk.push_back(streamer.encode(doc, &local.skipped_tokens));
          if (chunk_tokens >= kChunkTokens) {
            queue.push(std::move(chunk));
            chunk = {};
            chunk_tokens = 0;
          }
        });
        if (!chunk.empty()) queue.push(std::move(chunk));
        queue.close();
      } catch (...) {
        queue.abort();
        throw;
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (auto& c : counters) total.merge(std::move(c));
  }

  if (local.documents == 0) throw DataError("corpus contains no documents");
  if (summary) *summary = local;
  return std::move(total).finalize(window.integer_scale(), streamer.retention_factors(),
                                   meta_for(window, alpha));
}

CoocStats count_cooccurrences(std::string_view text, const DocumentFormat& format,
                              const Vocabulary& vocab, const WindowConfig& window,
                              double alpha, CountSummary* summary) {
  const EventStreamer streamer(vocab, window);
  CountSummary local;
  CoocCounter counter(static_cast<std::uint32_t>(vocab.size()));
  for_each_document(text, format, [&](std::vector<std::string>&& doc) {
    ++local.documents;
    local.tokens += doc.size();
    const auto ids = streamer.encode(doc, &local.skipped_tokens);
    counter.add_document(streamer, ids);
  });
  if (summary) *summary = local;
  return std::move(counter).finalize(window.integer_scale(), streamer.retention_factors(),
                                     meta_for(window, alpha));
}

}  // namespace pmifact
