#include "pmifact/corpus.hpp"

#include <algorithm>
#include <fstream>

#include "pmifact/error.hpp"

namespace pmifact {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Shared line-level document splitter.
class DocumentSplitter {
 public:
  DocumentSplitter(const DocumentFormat& format,
                   const std::function<void(std::vector<std::string>&&)>& visit)
      : format_(format), visit_(visit) {}

  void line(std::string_view raw) {
    const std::string_view text = trim(raw);
    if (text.empty() ||
        (!format_.delimiter.empty() && text == trim(format_.delimiter))) {
      flush();
      return;
    }
    auto tokens = tokenize(text);
    for (auto& t : tokens) current_.push_back(std::move(t));
  }

  void flush() {
    if (current_.empty()) return;
    std::vector<std::string> doc;
    doc.swap(current_);
    visit_(std::move(doc));
  }

 private:
  const DocumentFormat& format_;
  const std::function<void(std::vector<std::string>&&)>& visit_;
  std::vector<std::string> current_;
};

}  // namespace

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) {
      std::string tok(line.substr(i, j - i));
      for (char& c : tok) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
      out.push_back(std::move(tok));
    }
    i = j;
  }
  return out;
}

void for_each_document(
    std::span<const std::filesystem::path> files, const DocumentFormat& format,
    const std::function<void(std::vector<std::string>&&)>& visit) {
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus file: " + path.string());
    DocumentSplitter splitter(format, visit);
    std::string line;
    while (std::getline(in, line)) splitter.line(line);
    if (in.bad()) throw DataError("read error in corpus file: " + path.string());
    splitter.flush();
  }
}

void for_each_document(
    std::string_view text, const DocumentFormat& format,
    const std::function<void(std::vector<std::string>&&)>& visit) {
  DocumentSplitter splitter(format, visit);
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    splitter.line(text.substr(start, end - start));
    start = end + 1;
  }
  splitter.flush();
}

Vocabulary::Vocabulary(std::vector<std::string> tokens,
                       std::vector<std::uint64_t> counts, std::size_t max_size)
    : tokens_(std::move(tokens)), counts_(std::move(counts)), max_size_(max_size) {
  if (tokens_.size() != counts_.size()) {
    throw DataError("vocabulary: token and count lists differ in length");
  }
  if (tokens_.size() > max_size_) {
    throw DataError("vocabulary: more tokens than max_size");
  }
  if (tokens_.size() > std::size_t{INT32_MAX}) {
    throw DataError("vocabulary: too many tokens");
  }
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i > 0 && counts_[i] > counts_[i - 1]) {
      throw DataError("vocabulary: counts must be non-increasing, offending token '" +
                      tokens_[i] + "'");
    }
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw DataError("vocabulary: duplicate token '" + tokens_[i] + "'");
    }
    total_ += counts_[i];
  }
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double Vocabulary::frequency(TokenId id) const {
  return total_ == 0 ? 0.0
                     : static_cast<double>(counts_.at(id)) /
                           static_cast<double>(total_);
}

void VocabularyBuilder::add(std::string_view token) {
  auto [it, inserted] = entries_.try_emplace(std::string(token));
  if (inserted) it->second.first_seen = seen_;
  ++it->second.count;
  ++seen_;
}

void VocabularyBuilder::add(std::span<const std::string> tokens) {
  for (const auto& t : tokens) add(t);
}

Vocabulary VocabularyBuilder::build(std::size_t max_size,
                                    std::uint64_t min_count) const {
  if (max_size == 0) throw UsageError("vocabulary max_size must be positive");
  if (seen_ == 0) throw DataError("cannot build a vocabulary from an empty corpus");

  std::vector<std::pair<const std::string*, const Entry*>> kept;
  kept.reserve(entries_.size());
  for (const auto& [token, entry] : entries_) {
    if (entry.count >= min_count) kept.emplace_back(&token, &entry);
  }
  if (kept.empty()) {
    throw DataError("vocabulary is empty: no token occurs at least " +
                    std::to_string(min_count) + " times");
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second->count != b.second->count) return a.second->count > b.second->count;
    return a.second->first_seen < b.second->first_seen;
  });
  if (kept.size() > max_size) kept.resize(max_size);

  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
  tokens.reserve(kept.size());
  counts.reserve(kept.size());
  for (const auto& [token, entry] : kept) {
    tokens.push_back(*token);
    counts.push_back(entry->count);
  }
  return Vocabulary(std::move(tokens), std::move(counts), max_size);
}

Vocabulary build_vocabulary(std::span<const std::string> tokens,
                            std::size_t max_size, std::uint64_t min_count) {
  VocabularyBuilder builder;
  builder.add(tokens);
  return builder.build(max_size, min_count);
}

Vocabulary build_vocabulary(std::span<const std::filesystem::path> files,
                            const DocumentFormat& format, std::size_t max_size,
                            std::uint64_t min_count) {
  VocabularyBuilder builder;
  for_each_document(files, format, [&](std::vector<std::string>&& doc) {
    builder.add(doc);
  });
  return builder.build(max_size, min_count);
}

void write_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocabulary file: " + path.string());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.token(static_cast<TokenId>(i)) << '\t'
        << vocab.count(static_cast<TokenId>(i)) << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

Vocabulary read_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary file: " + path.string());
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected token<TAB>count");
    }
    std::uint64_t count = 0;
    try {
      std::size_t used = 0;
      count = std::stoull(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": bad count field");
    }
    tokens.push_back(line.substr(0, tab));
    counts.push_back(count);
  }
  if (tokens.empty()) throw DataError("vocabulary file is empty: " + path.string());
  const std::size_t n = tokens.size();
  return Vocabulary(std::move(tokens), std::move(counts), n);
}

}  // namespace pmifact
