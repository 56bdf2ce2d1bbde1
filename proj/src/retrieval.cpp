#include "booststep/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "booststep/digest.hpp"

namespace booststep {

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }
bool is_ascii_alpha(unsigned char c) { return c < 0x80 && std::isalpha(c); }

char lower(unsigned char c) { return c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c); }

// Raw counts keyed by dimension; out-of-vocabulary tokens are skipped.
template <class Lookup>
std::map<std::uint32_t, double> count_terms(std::string_view text, Lookup&& lookup) {
  std::map<std::uint32_t, double> counts;
  for (const auto& tok : tokenize(text)) {
    if (auto dim = lookup(tok)) counts[*dim] += 1.0;
  }
  return counts;
}

SparseVector weigh_and_normalize(const std::map<std::uint32_t, double>& counts,
                                 const std::vector<double>& idf) {
  SparseVector v;
  v.indices.reserve(counts.size());
  v.values.reserve(counts.size());
  double sq = 0.0;
  for (const auto& [dim, tf] : counts) {
    double w = tf * idf[dim];
    v.indices.push_back(dim);
    v.values.push_back(w);
    sq += w * w;
  }
  if (sq > 0.0) {
    double norm = std::sqrt(sq);
    for (auto& w : v.values) w /= norm;
  }
  return v;
}

}  // namespace

double SparseVector::norm() const {
  double sq = 0.0;
  for (double w : values) sq += w * w;
  return std::sqrt(sq);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    auto c = static_cast<unsigned char>(text[i]);
    if (c == '\\' && i + 1 < n && is_ascii_alpha(static_cast<unsigned char>(text[i + 1]))) {
      std::string tok = "\\";
      ++i;
      while (i < n && is_ascii_alpha(static_cast<unsigned char>(text[i]))) {
        tok.push_back(lower(static_cast<unsigned char>(text[i])));
        ++i;
      }
      out.push_back(std::move(tok));
    } else if (is_word_byte(c)) {
      std::string tok;
      while (i < n && is_word_byte(static_cast<unsigned char>(text[i]))) {
        tok.push_back(lower(static_cast<unsigned char>(text[i])));
        ++i;
      }
      out.push_back(std::move(tok));
    } else {
      ++i;
    }
  }
  return out;
}

double cosine_similarity(const SparseVector& a, const SparseVector& b) {
  double dot = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.indices.size() && j < b.indices.size()) {
    if (a.indices[i] == b.indices[j]) {
      dot += a.values[i] * b.values[j];
      ++i;
      ++j;
    } else if (a.indices[i] < b.indices[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return dot;
}

TfIdfIndex TfIdfIndex::build(const std::vector<std::string>& documents) {
  if (documents.empty()) throw RetrievalError("cannot build an index over an empty corpus");
  TfIdfIndex index;
  std::vector<double> df;
  std::vector<std::map<std::uint32_t, double>> counts;
  counts.reserve(documents.size());
  for (const auto& doc : documents) {
    auto c = count_terms(doc, [&](const std::string& tok) -> std::optional<std::uint32_t> {
      auto [it, inserted] =
          index.vocabulary_.emplace(tok, static_cast<std::uint32_t>(index.terms_.size()));
      if (inserted) {
        index.terms_.push_back(tok);
        df.push_back(0.0);
      }
      return it->second;
    });
    for (const auto& [dim, tf] : c) df[dim] += 1.0;
    counts.push_back(std::move(c));
  }
  const double n = static_cast<double>(documents.size());
  index.idf_.resize(df.size());
  for (std::size_t d = 0; d < df.size(); ++d) {
    index.idf_[d] = std::log((1.0 + n) / (1.0 + df[d])) + 1.0;
  }
  index.doc_vectors_.reserve(counts.size());
  for (const auto& c : counts) index.doc_vectors_.push_back(weigh_and_normalize(c, index.idf_));
  return index;
}

std::optional<std::uint32_t> TfIdfIndex::dimension(const std::string& token) const {
  auto it = vocabulary_.find(token);
  if (it == vocabulary_.end()) return std::nullopt;
  return it->second;
}

SparseVector TfIdfIndex::encode(std::string_view query) const {
  auto counts = count_terms(query, [&](const std::string& tok) { return dimension(tok); });
  return weigh_and_normalize(counts, idf_);
}

std::vector<RetrievalHit> TfIdfIndex::rank_all(std::string_view query) const {
  const auto q = encode(query);
  std::vector<RetrievalHit> hits(doc_vectors_.size());
  for (std::size_t d = 0; d < doc_vectors_.size(); ++d) {
    hits[d].doc = d;
    hits[d].similarity = cosine_similarity(q, doc_vectors_[d]);
  }
  std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.doc < b.doc;
  });
  for (std::size_t r = 0; r < hits.size(); ++r) hits[r].rank = r + 1;
  return hits;
}

std::vector<RetrievalHit> TfIdfIndex::retrieve(std::string_view query, std::size_t k,
                                               std::size_t rank_offset) const {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (rank_offset == 0) throw std::invalid_argument("rank offset is 1-based");
  if (rank_offset > doc_vectors_.size()) return {};
  auto all = rank_all(query);
  auto first = all.begin() + static_cast<std::ptrdiff_t>(rank_offset - 1);
  auto last = first + static_cast<std::ptrdiff_t>(std::min(k, all.size() - (rank_offset - 1)));
  return {first, last};
}

std::optional<RetrievalHit> TfIdfIndex::retrieve_with_rejection(std::string_view query,
                                                                double threshold,
                                                                std::size_t rank_offset) const {
  auto hits = retrieve(query, 1, rank_offset);
  if (hits.empty() || hits.front().similarity < threshold) return std::nullopt;
  return hits.front();
}

void TfIdfIndex::save(std::ostream& out) const {
  out << "booststep-tfidf 1\n" << terms_.size() << ' ' << doc_vectors_.size() << '\n';
  out << std::setprecision(17);
  for (std::size_t d = 0; d < terms_.size(); ++d) out << terms_[d] << ' ' << idf_[d] << '\n';
  for (const auto& v : doc_vectors_) {
    out << v.nnz();
    for (std::size_t i = 0; i < v.nnz(); ++i) out << ' ' << v.indices[i] << ':' << v.values[i];
    out << '\n';
  }
}

TfIdfIndex TfIdfIndex::load(std::istream& in) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "booststep-tfidf" || version != 1) throw RetrievalError("not a tfidf index file");
  std::size_t nterms = 0;
  std::size_t ndocs = 0;
  in >> nterms >> ndocs;
  TfIdfIndex index;
  index.terms_.resize(nterms);
  index.idf_.resize(nterms);
  for (std::size_t d = 0; d < nterms; ++d) {
    in >> index.terms_[d] >> index.idf_[d];
    index.vocabulary_.emplace(index.terms_[d], static_cast<std::uint32_t>(d));
  }
  index.doc_vectors_.resize(ndocs);
  for (auto& v : index.doc_vectors_) {
    std::size_t nnz = 0;
    in >> nnz;
    for (std::size_t i = 0; i < nnz; ++i) {
      std::uint32_t dim = 0;
      char colon = 0;
      double w = 0;
      in >> dim >> colon >> w;
      v.indices.push_back(dim);
      v.values.push_back(w);
    }
  }
  if (!in) throw RetrievalError("truncated tfidf index file");
  return index;
}

std::string TfIdfIndex::state_digest() const {
  std::ostringstream ss;
  save(ss);
  return sha256_hex(ss.str());
}

namespace {

std::vector<std::string> step_texts(const std::vector<StepRecord>& records) {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.step_text);
  return out;
}

std::vector<std::string> statements(const std::vector<ExampleProblem>& problems) {
  std::vector<std::string> out;
  out.reserve(problems.size());
  for (const auto& p : problems) out.push_back(p.statement);
  return out;
}

}  // namespace

StepRetriever::StepRetriever(const ExampleBank& bank)
    : records_(flatten_steps(bank)), index_(TfIdfIndex::build(step_texts(records_))) {}

std::optional<StepHit> StepRetriever::retrieve_with_rejection(std::string_view query,
                                                              double threshold,
                                                              std::size_t rank_offset) const {
  auto hit = index_.retrieve_with_rejection(query, threshold, rank_offset);
  if (!hit) return std::nullopt;
  return StepHit{*hit, &records_[hit->doc]};
}

std::vector<StepHit> StepRetriever::retrieve(std::string_view query, std::size_t k,
                                             std::size_t rank_offset) const {
  std::vector<StepHit> out;
  for (const auto& h : index_.retrieve(query, k, rank_offset)) out.push_back({h, &records_[h.doc]});
  return out;
}

ProblemRetriever::ProblemRetriever(const ExampleBank& bank)
    : problems_(bank.problems()), index_(TfIdfIndex::build(statements(problems_))) {}

std::vector<ProblemHit> ProblemRetriever::retrieve(std::string_view query, std::size_t k,
                                                   std::size_t rank_offset) const {
  std::vector<ProblemHit> out;
  for (const auto& h : index_.retrieve(query, k, rank_offset))
    out.push_back({h, &problems_[h.doc]});
  return out;
}

}  // namespace booststep
