#include "lfokit/lexdist.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "lfokit/errors.hpp"
#include "transport.hpp"

namespace lfokit {
namespace {

const std::set<std::string>& stop_words() {
  static const std::set<std::string> kStopWords = {
      "a",  "an",  "and", "are",  "at",   "be", "been", "for", "from", "in",  "into", "is",
      "it", "its", "of",  "on",   "or",   "so", "that", "the", "this", "to",  "was",  "were",
      "with"};
  return kStopWords;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// nBOW support of one sentence: distinct in-vocabulary tokens in first
// appearance order, with their counts.
struct Bag {
  std::vector<std::size_t> rows;      // embedding table rows
  std::vector<std::int64_t> counts;   // token occurrence counts
  std::int64_t total = 0;
};

Bag make_bag(const Sentence& sentence, const EmbeddingTable& table, const DistanceConfig& cfg) {
  Bag bag;
  bool any_token = false;
  for (const auto& token : sentence.tokens) {
    if (cfg.remove_stop_words && stop_words().count(token)) continue;
    any_token = true;
    auto it = table.index.find(token);
    if (it == table.index.end()) {
      if (cfg.oov_policy == OovPolicy::kError)
        throw UnknownWord("token not in embedding table: '" + token + "'");
      continue;
    }
    auto pos = std::find(bag.rows.begin(), bag.rows.end(), it->second);
    if (pos == bag.rows.end()) {
      bag.rows.push_back(it->second);
      bag.counts.push_back(1);
    } else {
      ++bag.counts[static_cast<std::size_t>(pos - bag.rows.begin())];
    }
    ++bag.total;
  }
  if (bag.total == 0)
    throw EmptyAfterFiltering("sentence '" + sentence.text() + "' has no usable tokens" +
                              (any_token ? " in the embedding vocabulary" : ""));
  return bag;
}

}  // namespace

const Eigen::VectorXd& EmbeddingTable::at(const std::string& word) const {
  auto it = index.find(word);
  if (it == index.end()) throw UnknownWord("word not in embedding table: '" + word + "'");
  return vectors[it->second];
}

EmbeddingTable load_embeddings(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  bool first_content_line = true;
  std::size_t line_no = 0;
  auto parse_component = [&](const std::string& tok) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
      throw MalformedInput("embeddings line " + std::to_string(line_no) + ": bad component '" +
                           tok + "'");
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = split_whitespace(line);
    if (tokens.empty()) continue;
    if (first_content_line) {
      first_content_line = false;
      // "<vocab_size> <dim>" header: exactly two non-negative integers
      if (tokens.size() == 2) {
        auto is_count = [](const std::string& t) {
          return !t.empty() && std::all_of(t.begin(), t.end(), [](unsigned char c) {
            return std::isdigit(c);
          });
        };
        if (is_count(tokens[0]) && is_count(tokens[1])) {
          table.dim = std::stoi(tokens[1]);
          if (table.dim <= 0) throw MalformedInput("embeddings header declares dim 0");
          continue;
        }
      }
    }
    if (tokens.size() < 2)
      throw MalformedInput("embeddings line " + std::to_string(line_no) + ": word without vector");
    if (table.dim == 0) table.dim = static_cast<int>(tokens.size()) - 1;
    if (static_cast<int>(tokens.size()) - 1 != table.dim)
      throw MalformedInput("embeddings line " + std::to_string(line_no) + ": expected " +
                           std::to_string(table.dim) + " components, got " +
                           std::to_string(tokens.size() - 1));
    Eigen::VectorXd vec(table.dim);
    for (int k = 0; k < table.dim; ++k) vec[k] = parse_component(tokens[static_cast<std::size_t>(k) + 1]);
    auto [it, inserted] = table.index.try_emplace(tokens[0], table.vectors.size());
    if (inserted) {
      table.vectors.push_back(std::move(vec));
    } else {
      table.vectors[it->second] = std::move(vec);  // last occurrence wins
      ++table.duplicates;
    }
  }
  if (table.vectors.empty()) throw MalformedInput("embedding stream contains no word vectors");
  return table;
}

EmbeddingTable load_embeddings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file: " + path);
  return load_embeddings(in);
}

Sentence Sentence::parse(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : text) {
    auto u = static_cast<unsigned char>(c);
    if (std::ispunct(u)) continue;
    cleaned.push_back(static_cast<char>(std::tolower(u)));
  }
  Sentence s;
  s.tokens = split_whitespace(cleaned);
  if (s.tokens.empty())
    throw MalformedInput("sentence is empty after normalization: '" + std::string(text) + "'");
  return s;
}

std::string Sentence::text() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

double wmd(const Sentence& a, const Sentence& b, const EmbeddingTable& table,
           const DistanceConfig& cfg) {
  Bag ba = make_bag(a, table, cfg);
  Bag bb = make_bag(b, table, cfg);
  // Equal nBOW vectors transport onto themselves at zero cost.
  if (ba.rows.size() == bb.rows.size()) {
    bool same = true;
    for (std::size_t i = 0; i < ba.rows.size() && same; ++i) {
      auto pos = std::find(bb.rows.begin(), bb.rows.end(), ba.rows[i]);
      same = pos != bb.rows.end() &&
             bb.counts[static_cast<std::size_t>(pos - bb.rows.begin())] * ba.total ==
                 ba.counts[i] * bb.total;
    }
    if (same) return 0.0;
  }

  const auto m = ba.rows.size();
  const auto n = bb.rows.size();
  std::vector<Eigen::VectorXd> left(m), right(n);
  for (std::size_t i = 0; i < m; ++i) left[i] = table.vectors[ba.rows[i]];
  for (std::size_t j = 0; j < n; ++j) right[j] = table.vectors[bb.rows[j]];
  if (cfg.l2_normalize) {
    for (auto& v : left)
      if (double nrm = v.norm(); nrm > 0) v /= nrm;
    for (auto& v : right)
      if (double nrm = v.norm(); nrm > 0) v /= nrm;
  }
  Eigen::MatrixXd cost(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) cost(i, j) = (left[i] - right[j]).norm();

  // Integer masses: weight count/total scaled by the other total, so the
  // solve is exact and the result divides back out.
  std::vector<std::int64_t> supply(m), demand(n);
  for (std::size_t i = 0; i < m; ++i) supply[i] = ba.counts[i] * bb.total;
  for (std::size_t j = 0; j < n; ++j) demand[j] = bb.counts[j] * ba.total;
  double raw = detail::solve_transport(supply, demand, cost);
  return raw / (static_cast<double>(ba.total) * static_cast<double>(bb.total));
}

double instruction_distance(const Sentence& desc, const Sentence& instr,
                            const EmbeddingTable& table, const DistanceConfig& cfg) {
  if (!(cfg.c_nothing >= 0.0) || !std::isfinite(cfg.c_nothing))
    throw InvalidParameter("c_nothing must be finite and non-negative");
  if (desc.is_nothing()) return cfg.c_nothing;
  return wmd(desc, instr, table, cfg);
}

}  // namespace lfokit
