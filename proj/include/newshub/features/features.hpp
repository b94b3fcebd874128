#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "newshub/label.hpp"

namespace newshub::features {

using TokenList = std::vector<std::string>;

// Lowercase, split on non-alphanumerics, drop tokens shorter than two
// characters and pure digits. PII placeholders map to url_tok, email_tok and
// user_tok.
TokenList tokenize(std::string_view text);

struct Vocabulary {
  // Index -> term, in lexicographic order.
  std::vector<std::string> terms;
  std::vector<std::size_t> document_frequency;
  std::size_t n_documents = 0;

  std::size_t size() const noexcept { return terms.size(); }
  std::optional<std::size_t> find(std::string_view term) const;
  // Stable hash over terms, frequencies and document count.
  std::string fingerprint() const;
  void reindex();

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

// Errc::config when nothing survives the filters or no document has tokens.
Vocabulary build_vocabulary(std::span<const TokenList> docs, std::size_t min_df = 2,
                            std::optional<std::size_t> max_features = std::nullopt);

nlohmann::json to_json(const Vocabulary& v);
Vocabulary vocabulary_from_json(const nlohmann::json& j);

// Compressed sparse rows; column indices ascending within each row.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> indptr{0};
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  struct Row {
    std::span<const std::uint32_t> indices;
    std::span<const double> values;
    std::size_t size() const noexcept { return indices.size(); }
  };

  Row row(std::size_t r) const {
    const std::size_t b = indptr[r], e = indptr[r + 1];
    return {std::span(indices).subspan(b, e - b), std::span(values).subspan(b, e - b)};
  }
  std::size_t nnz() const noexcept { return values.size(); }
  double at(std::size_t r, std::size_t c) const;

  // Appends a row given as (col, value) pairs in any order; zeros dropped.
  void push_row(std::vector<std::pair<std::uint32_t, double>> entries);

  static CsrMatrix from_dense(const std::vector<std::vector<double>>& dense);
  std::vector<std::vector<double>> to_dense() const;
  CsrMatrix select_rows(std::span<const std::size_t> rows) const;
};

// Raw term counts per document. Out-of-vocabulary tokens are ignored.
CsrMatrix count_matrix(std::span<const TokenList> docs, const Vocabulary& vocab);

// tf * (ln((1 + N) / (1 + df)) + 1), then each non-empty row L2-normalized.
CsrMatrix tfidf(std::span<const TokenList> docs, const Vocabulary& vocab);
double idf(const Vocabulary& vocab, std::size_t term);

// "rows cols nnz" header, then one "row col weight" line per entry.
void write_triplets(std::ostream& out, const CsrMatrix& m);
CsrMatrix read_triplets(std::istream& in);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  bool stratified = true;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// |train| = round(train_fraction * n); both index lists ascending.
// Errc::input for n < 5 or, when stratified, a class with one member.
Split split(std::span<const Label> labels, const SplitSpec& spec);

// Appends minority-class draws (with replacement) until both classes have
// equal counts. Errc::input when a class is missing.
std::vector<std::size_t> upsample(std::span<const std::size_t> train, std::span<const Label> labels,
                                  std::uint64_t seed);

}  // namespace newshub::features
