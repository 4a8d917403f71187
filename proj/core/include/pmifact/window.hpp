#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pmifact/corpus.hpp"

namespace pmifact {

enum class Weighting : std::uint8_t { flat = 0, dynamic = 1, harmonic = 2 };

std::string_view to_string(Weighting weighting);
Weighting parse_weighting(std::string_view name);

struct WindowConfig {
  std::uint32_t width = 5;
  Weighting weighting = Weighting::dynamic;
  // Frequency threshold t; disabled when empty.
  std::optional<double> undersample_t;

  void validate() const;

  // Weight of a pair `offset` tokens apart, offset in [1, width]:
  // flat 1, dynamic (w - o + 1) / w, harmonic 1 / o.
  double weight(std::uint32_t offset) const;

  // Every weight(o) equals integer_weight(o) / integer_scale() exactly in
  // rational arithmetic, which lets counts be accumulated as integers.
  std::uint64_t integer_scale() const;
  std::uint64_t integer_weight(std::uint32_t offset) const;

  bool operator==(const WindowConfig&) const = default;
};

// Largest window the integer counting path accepts for harmonic weighting;
// lcm(1..w) must stay far from 2^53.
inline constexpr std::uint32_t kMaxHarmonicWidth = 20;

struct CoocEvent {
  TokenId term = 0;
  TokenId context = 0;
  double weight = 0.0;

  bool operator==(const CoocEvent&) const = default;
};

// Turns documents into symmetric sliding-window term/context events.
// Out-of-vocabulary tokens keep their position but emit nothing, and
// windows never cross a document boundary.
class EventStreamer {
 public:
  EventStreamer(const Vocabulary& vocab, WindowConfig config);

  const WindowConfig& config() const { return config_; }

  // Undersampling retention factor min(1, sqrt(t / f_i)); 1 when disabled.
  double retention(TokenId id) const {
    return retention_.empty() ? 1.0 : retention_[id];
  }
  const std::vector<double>& retention_factors() const { return retention_; }

  // Maps tokens to ids, kOutOfVocabulary for unknown tokens.
  std::vector<std::int32_t> encode(std::span<const std::string> tokens,
                                   std::uint64_t* skipped = nullptr) const;

  // Calls sink(term, context, offset) for every in-window pair.
  template <class Sink>
  void for_each_pair(std::span<const std::int32_t> ids, Sink&& sink) const {
    const std::size_t n = ids.size();
    const std::size_t w = config_.width;
    for (std::size_t t = 0; t < n; ++t) {
      if (ids[t] < 0) continue;
      const auto term = static_cast<TokenId>(ids[t]);
      const std::size_t lo = t >= w ? t - w : 0;
      const std::size_t hi = std::min(n - 1, t + w);
      for (std::size_t c = lo; c <= hi; ++c) {
        if (c == t || ids[c] < 0) continue;
        const auto offset = static_cast<std::uint32_t>(c > t ? c - t : t - c);
        sink(term, static_cast<TokenId>(ids[c]), offset);
      }
    }
  }

  // Events with their full weight (window weight times retention factors).
  void append_events(std::span<const std::int32_t> ids,
                     std::vector<CoocEvent>& out) const;

 private:
  const Vocabulary* vocab_;
  WindowConfig config_;
  std::vector<double> retention_;
};

struct EventStream {
  std::vector<CoocEvent> events;
  std::uint64_t skipped_tokens = 0;
};

// Materializes every event of an in-memory text. Meant for small inputs and
// tests; the counting path in cooc_counter.hpp never builds this list.
EventStream stream_events(std::string_view text, const DocumentFormat& format,
                          const Vocabulary& vocab, const WindowConfig& config);

}  // namespace pmifact
