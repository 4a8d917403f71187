#include "pmifact/window.hpp"

#include <cmath>
#include <numeric>

#include "pmifact/error.hpp"

namespace pmifact {

std::string_view to_string(Weighting weighting) {
  switch (weighting) {
    case Weighting::flat: return "flat";
    case Weighting::dynamic: return "dynamic";
    case Weighting::harmonic: return "harmonic";
  }
  return "unknown";
}

Weighting parse_weighting(std::string_view name) {
  if (name == "flat") return Weighting::flat;
  if (name == "dynamic") return Weighting::dynamic;
  if (name == "harmonic") return Weighting::harmonic;
  throw UsageError("unknown window weighting '" + std::string(name) +
                   "' (expected flat, dynamic or harmonic)");
}

void WindowConfig::validate() const {
  if (width < 1) throw UsageError("window width must be at least 1");
  if (weighting == Weighting::harmonic && width > kMaxHarmonicWidth) {
    throw UsageError("harmonic weighting supports window widths up to " +
                     std::to_string(kMaxHarmonicWidth));
  }
  if (undersample_t && !(*undersample_t > 0.0 && *undersample_t <= 1.0)) {
    throw UsageError("undersampling threshold must lie in (0, 1]");
  }
}

double WindowConfig::weight(std::uint32_t offset) const {
  switch (weighting) {
    case Weighting::flat: return 1.0;
    case Weighting::dynamic:
      return static_cast<double>(width - offset + 1) / static_cast<double>(width);
    case Weighting::harmonic: return 1.0 / static_cast<double>(offset);
  }
  return 0.0;
}

std::uint64_t WindowConfig::integer_scale() const {
  switch (weighting) {
    case Weighting::flat: return 1;
    case Weighting::dynamic: return width;
    case Weighting::harmonic: {
      std::uint64_t l = 1;
      for (std::uint64_t o = 2; o <= width; ++o) l = std::lcm(l, o);
      return l;
    }
  }
  return 1;
}

std::uint64_t WindowConfig::integer_weight(std::uint32_t offset) const {
  switch (weighting) {
    case Weighting::flat: return 1;
    case Weighting::dynamic: return width - offset + 1;
    case Weighting::harmonic: return integer_scale() / offset;
  }
  return 0;
}

EventStreamer::EventStreamer(const Vocabulary& vocab, WindowConfig config)
    : vocab_(&vocab), config_(config) {
  config_.validate();
  if (config_.undersample_t) {
    const double t = *config_.undersample_t;
    retention_.resize(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      const double f = vocab.frequency(static_cast<TokenId>(i));
      retention_[i] = f <= t ? 1.0 : std::min(1.0, std::sqrt(t / f));
    }
  }
}

std::vector<std::int32_t> EventStreamer::encode(std::span<const std::string> tokens,
                                                std::uint64_t* skipped) const {
  std::vector<std::int32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& tok : tokens) {
    if (auto id = vocab_->find(tok)) {
      ids.push_back(static_cast<std::int32_t>(*id));
    } else {
      ids.push_back(kOutOfVocabulary);
      if (skipped) ++*skipped;
    }
  }
  return ids;
}

void EventStreamer::append_events(std::span<const std::int32_t> ids,
                                  std::vector<CoocEvent>& out) const {
  for_each_pair(ids, [&](TokenId i, TokenId j, std::uint32_t offset) {
    out.push_back({i, j, config_.weight(offset) * retention(i) * retention(j)});
  });
}

EventStream stream_events(std::string_view text, const DocumentFormat& format,
                          const Vocabulary& vocab, const WindowConfig& config) {
  EventStreamer streamer(vocab, config);
  EventStream result;
  for_each_document(text, format, [&](std::vector<std::string>&& doc) {
    const auto ids = streamer.encode(doc, &result.skipped_tokens);
    streamer.append_events(ids, result.events);
  });
  return result;
}

}  // namespace pmifact
