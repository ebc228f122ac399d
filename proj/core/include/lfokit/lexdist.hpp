#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lfokit {

/// Word -> vector table in the word2vec text format. Immutable after load.
struct EmbeddingTable {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<Eigen::VectorXd> vectors;
  int dim = 0;
  int duplicates = 0;  // duplicate words seen at load; last occurrence wins

  std::size_t size() const { return vectors.size(); }
  bool contains(const std::string& word) const { return index.count(word) > 0; }
  const Eigen::VectorXd& at(const std::string& word) const;
};

// Text format: optional first line "<vocab_size> <dim>", then one line per
// word: token followed by dim whitespace-separated floats. Without a header
// the dimension is inferred from the first row.
EmbeddingTable load_embeddings(std::istream& in);
EmbeddingTable load_embeddings_file(const std::string& path);

/// Ordered lowercase tokens. Normalization is lowercase, punctuation
/// stripped, whitespace split. The token sequence ["nothing"] is the
/// reserved noise label.
struct Sentence {
  std::vector<std::string> tokens;

  static Sentence parse(std::string_view text);
  bool is_nothing() const { return tokens.size() == 1 && tokens[0] == "nothing"; }
  std::string text() const;
  bool operator==(const Sentence&) const = default;
};

enum class OovPolicy { kDrop, kError };

struct DistanceConfig {
  double c_nothing = 2.0;                   // constant distance for the noise label
  OovPolicy oov_policy = OovPolicy::kDrop;
  bool remove_stop_words = false;
  bool l2_normalize = false;                // normalize embeddings before the solve
};

/// Exact word mover's distance between the normalized bag-of-words weight
/// vectors of `a` and `b`; ground cost is the Euclidean distance between
/// embeddings. The transport problem is solved exactly (sentences are short,
/// so the problem is tiny).
double wmd(const Sentence& a, const Sentence& b, const EmbeddingTable& table,
           const DistanceConfig& cfg);

/// wmd, except a "nothing" description costs the constant cfg.c_nothing
/// against any instruction.
double instruction_distance(const Sentence& desc, const Sentence& instr,
                            const EmbeddingTable& table, const DistanceConfig& cfg);

}  // namespace lfokit
