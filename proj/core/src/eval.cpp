#include "pmifact/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "pmifact/error.hpp"

namespace pmifact {

namespace {

template <class T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) throw DataError("cosine of vectors with different lengths");
  double uv = 0, uu = 0, vv = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    uv += double(u[k]) * double(v[k]);
    uu += double(u[k]) * double(u[k]);
    vv += double(v[k]) * double(v[k]);
  }
  if (uu == 0.0 || vv == 0.0) throw DataError("cosine of a zero vector");
  return std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

std::span<const float> row_span(const EmbeddingTable::Matrix& m, std::size_t r) {
  return {m.data() + r * static_cast<std::size_t>(m.cols()),
          static_cast<std::size_t>(m.cols())};
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(std::move(w));
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string name_or_stem(std::string name, const std::filesystem::path& path) {
  return name.empty() ? path.stem().string() : name;
}

}  // namespace

double cosine(std::span<const float> u, std::span<const float> v) {
  return cosine_impl(u, v);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  return cosine_impl(u, v);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (double(i) + double(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("correlation of samples of different sizes");
  if (x.size() < 2) throw DataError("correlation needs at least two values");
  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("correlation undefined for constant values");
  return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("correlation of samples of different sizes");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

SimilarityDataset load_similarity_dataset(const std::filesystem::path& path,
                                          std::string name) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open similarity dataset: " + path.string());
  SimilarityDataset data{name_or_stem(std::move(name), path), {}};
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields_ws = split_ws(line);
    if (fields_ws.empty() || fields_ws.front().front() == '#') continue;
    std::vector<std::string> fields;
    if (line.find('\t') != std::string::npos) {
      std::istringstream is(line);
      for (std::string f; std::getline(is, f, '\t');) fields.push_back(f);
    } else {
      fields = fields_ws;
    }
    std::optional<double> score;
    if (fields.size() >= 3) score = parse_double(fields[2]);
    if (!score) {
      if (first) {  // column header
        first = false;
        continue;
      }
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected word_a<TAB>word_b<TAB>score");
    }
    first = false;
    data.pairs.push_back({lower(fields[0]), lower(fields[1]), *score});
  }
  return data;
}

AnalogyDataset load_analogy_dataset(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open analogy dataset: " + path.string());
  AnalogyDataset data{name_or_stem(std::move(name), path), {}};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto w = split_ws(line);
    if (w.empty() || w.front().front() == ':') continue;
    if (w.size() != 4) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected four words 'a a* b b*'");
    }
    data.quads.push_back({lower(w[0]), lower(w[1]), lower(w[2]), lower(w[3])});
  }
  return data;
}

SimilarityResult spearman_eval(const EmbeddingTable& table, const SimilarityDataset& data) {
  if (data.pairs.empty()) throw DataError("similarity dataset " + data.name + " is empty");
  SimilarityResult res;
  res.total = data.pairs.size();
  std::vector<double> model, gold;
  for (const auto& p : data.pairs) {
    const auto a = table.find(p.a);
    const auto b = table.find(p.b);
    if (!a || !b) continue;
    model.push_back(cosine(row_span(table.vectors(), *a), row_span(table.vectors(), *b)));
    gold.push_back(p.gold);
  }
  res.kept = model.size();
  if (res.kept < 2) {
    throw DataError("insufficient coverage: " + std::to_string(res.kept) + " of " +
                    std::to_string(res.total) + " pairs of " + data.name +
                    " are in the vocabulary");
  }
  res.rho = spearman(model, gold);
  return res;
}

std::string_view to_string(AnalogyMethod method) {
  return method == AnalogyMethod::add ? "3cosadd" : "3cosmul";
}

AnalogySolver::AnalogySolver(const EmbeddingTable& table, double epsilon)
    : table_(&table), unit_(table.vectors()), usable_(table.size()), epsilon_(epsilon) {
  if (!(epsilon > 0.0)) throw UsageError("analogy epsilon must be positive");
  for (Eigen::Index r = 0; r < unit_.rows(); ++r) {
    const double n = unit_.row(r).cast<double>().norm();
    usable_[static_cast<std::size_t>(r)] = n > 0.0;
    if (n > 0.0) unit_.row(r) = (unit_.row(r).cast<double>() / n).cast<float>();
  }
}

std::size_t AnalogySolver::lookup(std::string_view word) const {
  const auto r = table_->find(word);
  auto fail = [&](const char* why) {
    return DataError("analogy query word '" + std::string(word) + "' " + why);
  };
  if (!r) throw fail("is not in the vocabulary");
  if (!usable_[*r]) throw fail("has a zero vector");
  return *r;
}

std::size_t AnalogySolver::argmax(const float* ca, const float* cas, const float* cb,
                                  std::size_t a, std::size_t a_star, std::size_t b,
                                  AnalogyMethod method) const {
  std::size_t best = table_->size();
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < table_->size(); ++x) {
    if (x == a || x == a_star || x == b || !usable_[x]) continue;
    double s;
    if (method == AnalogyMethod::add) {
      s = double(cas[x]) - double(ca[x]) + double(cb[x]);
    } else {
      const double sa = (double(ca[x]) + 1.0) / 2.0;
      const double sas = (double(cas[x]) + 1.0) / 2.0;
      const double sb = (double(cb[x]) + 1.0) / 2.0;
      s = sb * sas / (sa + epsilon_);
    }
    if (s > best_score) {
      best_score = s;
      best = x;
    }
  }
  if (best == table_->size()) throw DataError("analogy has no candidate besides the query words");
  return best;
}

std::size_t AnalogySolver::solve(std::size_t a, std::size_t a_star, std::size_t b,
                                 AnalogyMethod method) const {
  const Eigen::VectorXf ca = unit_ * unit_.row(static_cast<Eigen::Index>(a)).transpose();
  const Eigen::VectorXf cas = unit_ * unit_.row(static_cast<Eigen::Index>(a_star)).transpose();
  const Eigen::VectorXf cb = unit_ * unit_.row(static_cast<Eigen::Index>(b)).transpose();
  return argmax(ca.data(), cas.data(), cb.data(), a, a_star, b, method);
}

std::size_t AnalogySolver::solve(std::string_view a, std::string_view a_star,
                                 std::string_view b, AnalogyMethod method) const {
  return solve(lookup(a), lookup(a_star), lookup(b), method);
}

std::vector<std::pair<std::size_t, std::size_t>> AnalogySolver::solve_batch(
    std::span<const std::array<std::size_t, 3>> rows) const {
  constexpr std::size_t kBatch = 128;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(rows.size());
  for (std::size_t start = 0; start < rows.size(); start += kBatch) {
    const std::size_t n = std::min(kBatch, rows.size() - start);
    EmbeddingTable::Matrix q(static_cast<Eigen::Index>(3 * n), unit_.cols());
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t s = 0; s < 3; ++s) {
        q.row(static_cast<Eigen::Index>(3 * k + s)) =
            unit_.row(static_cast<Eigen::Index>(rows[start + k][s]));
      }
    }
    // Column-major, so each query word's cosines are contiguous.
    const Eigen::MatrixXf sims = unit_ * q.transpose();
    for (std::size_t k = 0; k < n; ++k) {
      const auto& r = rows[start + k];
      const float* ca = sims.col(static_cast<Eigen::Index>(3 * k)).data();
      const float* cas = sims.col(static_cast<Eigen::Index>(3 * k + 1)).data();
      const float* cb = sims.col(static_cast<Eigen::Index>(3 * k + 2)).data();
      out.emplace_back(argmax(ca, cas, cb, r[0], r[1], r[2], AnalogyMethod::add),
                       argmax(ca, cas, cb, r[0], r[1], r[2], AnalogyMethod::mul));
    }
  }
  return out;
}

std::string analogy_3cosmul(const EmbeddingTable& table, std::string_view a,
                            std::string_view a_star, std::string_view b, double epsilon) {
  const AnalogySolver solver(table, epsilon);
  return table.token(solver.solve(a, a_star, b, AnalogyMethod::mul));
}

std::string analogy_3cosadd(const EmbeddingTable& table, std::string_view a,
                            std::string_view a_star, std::string_view b) {
  const AnalogySolver solver(table);
  return table.token(solver.solve(a, a_star, b, AnalogyMethod::add));
}

AnalogyResult analogy_eval(const EmbeddingTable& table, const AnalogyDataset& data,
                           double epsilon) {
  const AnalogySolver solver(table, epsilon);
  AnalogyResult res;
  res.total = data.quads.size();
  std::vector<std::array<std::size_t, 3>> queries;
  std::vector<std::size_t> answers;
  for (const auto& q : data.quads) {
    const auto a = table.find(q.a), as = table.find(q.a_star), b = table.find(q.b),
               bs = table.find(q.b_star);
    if (!a || !as || !b || !bs) continue;
    queries.push_back({*a, *as, *b});
    answers.push_back(*bs);
  }
  res.attempted = queries.size();
  const auto predicted = solver.solve_batch(queries);
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    res.correct_add += predicted[k].first == answers[k];
    res.correct_mul += predicted[k].second == answers[k];
  }
  return res;
}

std::string_view to_string(Geometry geometry) {
  switch (geometry) {
    case Geometry::tt_cos: return "tt_cos";
    case Geometry::tt_dot: return "tt_dot";
    case Geometry::tc_dot: return "tc_dot";
    case Geometry::tc_cos: return "tc_cos";
  }
  return "unknown";
}

Geometry parse_geometry(std::string_view name) {
  if (name == "tt_cos") return Geometry::tt_cos;
  if (name == "tt_dot") return Geometry::tt_dot;
  if (name == "tc_dot") return Geometry::tc_dot;
  if (name == "tc_cos") return Geometry::tc_cos;
  throw UsageError("unknown geometry '" + std::string(name) +
                   "' (expected tt_cos, tt_dot, tc_dot or tc_cos)");
}

std::vector<Neighbor> neighbors(const EmbeddingTable& terms, const EmbeddingTable* contexts,
                                std::string_view word, Geometry geometry, std::size_t top_n) {
  const bool tc = geometry == Geometry::tc_dot || geometry == Geometry::tc_cos;
  const bool cos = geometry == Geometry::tt_cos || geometry == Geometry::tc_cos;
  if (tc && contexts == nullptr) {
    throw UsageError(std::string(to_string(geometry)) + " needs context vectors");
  }
  const EmbeddingTable& cand = tc ? *contexts : terms;
  if (cand.dim() != terms.dim()) throw DataError("term and context dimensions differ");
  const auto q = terms.find(word);
  if (!q) throw DataError("'" + std::string(word) + "' is not in the vocabulary");
  const auto self = cand.find(word);

  const auto qv = row_span(terms.vectors(), *q);
  double qn = 0;
  for (float x : qv) qn += double(x) * double(x);
  qn = std::sqrt(qn);
  if (cos && qn == 0.0) throw DataError("'" + std::string(word) + "' has a zero vector");

  std::vector<Neighbor> all;
  all.reserve(cand.size());
  for (std::size_t r = 0; r < cand.size(); ++r) {
    if (self && r == *self) continue;
    const auto v = row_span(cand.vectors(), r);
    double dot = 0, vn = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      dot += double(qv[k]) * double(v[k]);
      vn += double(v[k]) * double(v[k]);
    }
    if (cos) {
      if (vn == 0.0) continue;
      dot /= qn * std::sqrt(vn);
    }
    all.push_back({r, {}, dot});
  }
  const std::size_t n = std::min(top_n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(),
                    [](const Neighbor& a, const Neighbor& b) {
                      return a.score != b.score ? a.score > b.score : a.row < b.row;
                    });
  all.resize(n);
  for (auto& nb : all) nb.token = cand.token(nb.row);
  return all;
}

void write_report_csv(std::ostream& out, std::span<const ReportRow> rows) {
  out << "name,metric,value,coverage\n";
  for (const auto& r : rows) {
    out << r.name << ',' << r.metric << ',';
    if (r.value) {
      out << std::fixed << std::setprecision(6) << *r.value;
    } else {
      out << "ERROR";
    }
    out << ',' << std::fixed << std::setprecision(4) << r.coverage << '\n';
  }
}

}  // namespace pmifact
