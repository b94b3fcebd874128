#include "newshub/features/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "newshub/error.hpp"
#include "newshub/hash.hpp"
#include "newshub/random.hpp"

namespace newshub::features {

using nlohmann::json;

namespace {

bool word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

struct Placeholder {
  std::string_view marker;
  const char* token;
};
constexpr Placeholder kPlaceholders[] = {
    {"[URL]", "url_tok"}, {"[EMAIL]", "email_tok"}, {"[USER]", "user_tok"}};

}  // namespace

TokenList tokenize(std::string_view text) {
  TokenList out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2 &&
        !std::all_of(cur.begin(), cur.end(), [](unsigned char c) { return std::isdigit(c); }))
      out.push_back(cur);
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] == '[') {
      bool matched = false;
      for (const auto& p : kPlaceholders) {
        if (text.substr(i, p.marker.size()) == p.marker) {
          flush();
          out.emplace_back(p.token);
          i += p.marker.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    auto c = static_cast<unsigned char>(text[i]);
    if (word_byte(c))
      cur.push_back(static_cast<char>(std::tolower(c)));
    else
      flush();
    ++i;
  }
  flush();
  return out;
}

std::optional<std::size_t> Vocabulary::find(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::reindex() {
  index_.clear();
  index_.reserve(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) index_.emplace(terms[i], i);
}

std::string Vocabulary::fingerprint() const {
  Fnv1a h;
  h.update(std::to_string(n_documents));
  for (std::size_t i = 0; i < terms.size(); ++i) {
    h.update("\n");
    h.update(terms[i]);
    h.update("\t");
    h.update(std::to_string(document_frequency[i]));
  }
  return h.hex();
}

Vocabulary build_vocabulary(std::span<const TokenList> docs, std::size_t min_df,
                            std::optional<std::size_t> max_features) {
  if (min_df == 0) throw Error(Errc::config, "min_df must be at least 1");
  if (max_features && *max_features == 0) throw Error(Errc::config, "max_features must be positive");
  if (std::all_of(docs.begin(), docs.end(), [](const TokenList& d) { return d.empty(); }))
    throw Error(Errc::config, "cannot build a vocabulary: no document has tokens");

  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    TokenList uniq = doc;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (auto& t : uniq) ++df[t];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [t, n] : df)
    if (n >= min_df) kept.emplace_back(t, n);
  if (max_features && kept.size() > *max_features) {
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    kept.resize(*max_features);
    std::sort(kept.begin(), kept.end());
  }
  if (kept.empty())
    throw Error(Errc::config, "vocabulary is empty after filtering with min_df " + std::to_string(min_df));

  Vocabulary v;
  v.n_documents = docs.size();
  for (auto& [t, n] : kept) {
    v.terms.push_back(t);
    v.document_frequency.push_back(n);
  }
  v.reindex();
  return v;
}

json to_json(const Vocabulary& v) {
  json terms = json::object();
  json df = json::object();
  for (std::size_t i = 0; i < v.size(); ++i) {
    terms[v.terms[i]] = i;
    df[v.terms[i]] = v.document_frequency[i];
  }
  return {{"n_documents", v.n_documents},
          {"term_to_index", terms},
          {"document_frequency", df},
          {"fingerprint", v.fingerprint()}};
}

Vocabulary vocabulary_from_json(const json& j) {
  Vocabulary v;
  try {
    v.n_documents = j.at("n_documents").get<std::size_t>();
    const auto& terms = j.at("term_to_index");
    const auto& df = j.at("document_frequency");
    v.terms.resize(terms.size());
    v.document_frequency.resize(terms.size());
    std::vector<bool> seen(terms.size(), false);
    for (auto it = terms.begin(); it != terms.end(); ++it) {
      auto idx = it.value().get<std::size_t>();
      if (idx >= terms.size() || seen[idx])
        throw Error(Errc::input, "vocabulary indices are not a permutation of 0..n-1");
      seen[idx] = true;
      v.terms[idx] = it.key();
      auto d = df.at(it.key()).get<std::size_t>();
      if (d == 0 || d > v.n_documents)
        throw Error(Errc::input, "document frequency out of range for term '" + it.key() + "'");
      v.document_frequency[idx] = d;
    }
  } catch (const json::exception& e) {
    throw Error(Errc::input, std::string("malformed vocabulary: ") + e.what());
  }
  v.reindex();
  return v;
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  auto rw = row(r);
  auto it = std::lower_bound(rw.indices.begin(), rw.indices.end(), c);
  if (it == rw.indices.end() || *it != c) return 0.0;
  return rw.values[static_cast<std::size_t>(it - rw.indices.begin())];
}

void CsrMatrix::push_row(std::vector<std::pair<std::uint32_t, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i + 1 < entries.size() && entries[i].first == entries[i + 1].first)
      throw Error(Errc::input, "duplicate column in sparse row");
    if (entries[i].first >= cols) throw Error(Errc::input, "sparse column index out of range");
    if (entries[i].second == 0.0) continue;
    indices.push_back(entries[i].first);
    values.push_back(entries[i].second);
  }
  indptr.push_back(values.size());
  ++rows;
}

CsrMatrix CsrMatrix::from_dense(const std::vector<std::vector<double>>& dense) {
  CsrMatrix m;
  m.cols = dense.empty() ? 0 : dense.front().size();
  for (const auto& r : dense) {
    if (r.size() != m.cols) throw Error(Errc::input, "ragged dense matrix");
    std::vector<std::pair<std::uint32_t, double>> e;
    for (std::size_t c = 0; c < r.size(); ++c)
      if (r[c] != 0.0) e.emplace_back(static_cast<std::uint32_t>(c), r[c]);
    m.push_row(std::move(e));
  }
  return m;
}

std::vector<std::vector<double>> CsrMatrix::to_dense() const {
  std::vector<std::vector<double>> out(rows, std::vector<double>(cols, 0.0));
  for (std::size_t r = 0; r < rows; ++r) {
    auto rw = row(r);
    for (std::size_t k = 0; k < rw.size(); ++k) out[r][rw.indices[k]] = rw.values[k];
  }
  return out;
}

CsrMatrix CsrMatrix::select_rows(std::span<const std::size_t> which) const {
  CsrMatrix m;
  m.cols = cols;
  for (std::size_t r : which) {
    if (r >= rows) throw Error(Errc::input, "row index out of range");
    auto rw = row(r);
    m.indices.insert(m.indices.end(), rw.indices.begin(), rw.indices.end());
    m.values.insert(m.values.end(), rw.values.begin(), rw.values.end());
    m.indptr.push_back(m.values.size());
    ++m.rows;
  }
  return m;
}

CsrMatrix count_matrix(std::span<const TokenList> docs, const Vocabulary& vocab) {
  CsrMatrix m;
  m.cols = vocab.size();
  for (const auto& doc : docs) {
    std::map<std::uint32_t, double> counts;
    for (const auto& t : doc)
      if (auto idx = vocab.find(t)) counts[static_cast<std::uint32_t>(*idx)] += 1.0;
    m.push_row({counts.begin(), counts.end()});
  }
  return m;
}

double idf(const Vocabulary& vocab, std::size_t term) {
  const double n = static_cast<double>(vocab.n_documents);
  const double df = static_cast<double>(vocab.document_frequency.at(term));
  return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

CsrMatrix tfidf(std::span<const TokenList> docs, const Vocabulary& vocab) {
  std::vector<double> weights(vocab.size());
  for (std::size_t t = 0; t < vocab.size(); ++t) weights[t] = idf(vocab, t);
  CsrMatrix m = count_matrix(docs, vocab);
  for (std::size_t r = 0; r < m.rows; ++r) {
    double norm2 = 0.0;
    for (std::size_t k = m.indptr[r]; k < m.indptr[r + 1]; ++k) {
      m.values[k] *= weights[m.indices[k]];
      norm2 += m.values[k] * m.values[k];
    }
    if (norm2 == 0.0) continue;
    const double norm = std::sqrt(norm2);
    for (std::size_t k = m.indptr[r]; k < m.indptr[r + 1]; ++k) m.values[k] /= norm;
  }
  return m;
}

void write_triplets(std::ostream& out, const CsrMatrix& m) {
  out << m.rows << ' ' << m.cols << ' ' << m.nnz() << '\n';
  char buf[32];
  for (std::size_t r = 0; r < m.rows; ++r) {
    auto rw = m.row(r);
    for (std::size_t k = 0; k < rw.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", rw.values[k]);
      out << r << ' ' << rw.indices[k] << ' ' << buf << '\n';
    }
  }
}

CsrMatrix read_triplets(std::istream& in) {
  std::size_t rows = 0, cols = 0, nnz = 0;
  if (!(in >> rows >> cols >> nnz)) throw Error(Errc::parse, "missing triplet header");
  std::vector<std::vector<std::pair<std::uint32_t, double>>> entries(rows);
  for (std::size_t i = 0; i < nnz; ++i) {
    std::size_t r = 0, c = 0;
    double w = 0;
    if (!(in >> r >> c >> w)) throw Error(Errc::parse, "truncated triplet body at entry " + std::to_string(i));
    if (r >= rows || c >= cols) throw Error(Errc::parse, "triplet index out of range");
    entries[r].emplace_back(static_cast<std::uint32_t>(c), w);
  }
  CsrMatrix m;
  m.cols = cols;
  for (auto& e : entries) m.push_row(std::move(e));
  return m;
}

Split split(std::span<const Label> labels, const SplitSpec& spec) {
  const std::size_t n = labels.size();
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw Error(Errc::input, "train_fraction must be in (0, 1)");
  if (n < 5) throw Error(Errc::input, "need at least 5 rows to split, got " + std::to_string(n));
  const auto target = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
  Rng rng = make_rng(spec.seed);
  Split out;

  if (!spec.stratified) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    shuffle(std::span(idx), rng);
    out.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(target));
    out.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(target), idx.end());
  } else {
    std::vector<std::size_t> members[2];
    for (std::size_t i = 0; i < n; ++i) members[to_int(labels[i])].push_back(i);
    for (int c = 0; c < 2; ++c) {
      if (members[c].size() == 1)
        throw Error(Errc::input, "stratified split impossible: class " + std::to_string(c) +
                                     " has a single member");
    }
    // Largest-remainder apportionment of the train quota across classes.
    std::size_t quota[2];
    double rem[2];
    std::size_t assigned = 0;
    for (int c = 0; c < 2; ++c) {
      double exact = spec.train_fraction * static_cast<double>(members[c].size());
      quota[c] = static_cast<std::size_t>(std::floor(exact));
      rem[c] = exact - static_cast<double>(quota[c]);
      assigned += quota[c];
    }
    while (assigned < target) {
      int c = rem[1] > rem[0] ? 1 : 0;
      if (quota[c] == members[c].size()) c = 1 - c;
      ++quota[c];
      rem[c] = -1.0;
      ++assigned;
    }
    for (int c = 0; c < 2; ++c) {
      shuffle(std::span(members[c]), rng);
      auto cut = members[c].begin() + static_cast<std::ptrdiff_t>(quota[c]);
      out.train.insert(out.train.end(), members[c].begin(), cut);
      out.test.insert(out.test.end(), cut, members[c].end());
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<std::size_t> upsample(std::span<const std::size_t> train, std::span<const Label> labels,
                                  std::uint64_t seed) {
  std::vector<std::size_t> members[2];
  for (std::size_t i : train) {
    if (i >= labels.size()) throw Error(Errc::input, "train index out of range");
    members[to_int(labels[i])].push_back(i);
  }
  for (int c = 0; c < 2; ++c)
    if (members[c].empty())
      throw Error(Errc::input, "cannot upsample: class " + std::to_string(c) + " is absent from train");
  std::vector<std::size_t> out(train.begin(), train.end());
  const int minority = members[1].size() < members[0].size() ? 1 : 0;
  const auto& pool = members[minority];
  const std::size_t need = members[1 - minority].size() - pool.size();
  Rng rng = make_rng(seed);
  for (std::size_t i = 0; i < need; ++i) out.push_back(pool[uniform_below(rng, pool.size())]);
  return out;
}

}  // namespace newshub::features
