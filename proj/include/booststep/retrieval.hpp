#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "booststep/example_bank.hpp"

namespace booststep {

class RetrievalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sparse weights, dimensions strictly increasing.
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  bool empty() const { return indices.empty(); }
  std::size_t nnz() const { return indices.size(); }
  double norm() const;
};

// Lowercased tokens: maximal runs of ASCII alphanumerics (bytes >= 0x80 count
// as word characters), and backslash commands such as "\frac" kept whole.
// Everything else separates tokens.
std::vector<std::string> tokenize(std::string_view text);

// Dot product of two normalized vectors; zero if either is empty.
double cosine_similarity(const SparseVector& a, const SparseVector& b);

struct RetrievalHit {
  std::size_t doc = 0;
  double similarity = 0.0;
  std::size_t rank = 0;  // 1-based
};

/// Frozen TF-IDF model over a document list.
///
/// tf is the raw count, idf = ln((1 + N) / (1 + df)) + 1, and every document
/// vector is L2-normalized. Dimensions are numbered by first occurrence.
/// Queries never touch the vocabulary or idf table.
class TfIdfIndex {
 public:
  // Throws RetrievalError on an empty corpus.
  static TfIdfIndex build(const std::vector<std::string>& documents);

  SparseVector encode(std::string_view query) const;

  // Every document, sorted by similarity descending then document order.
  std::vector<RetrievalHit> rank_all(std::string_view query) const;

  // Hits ranked rank_offset .. rank_offset + k - 1; empty once exhausted.
  std::vector<RetrievalHit> retrieve(std::string_view query, std::size_t k,
                                     std::size_t rank_offset = 1) const;

  // The rank_offset-th hit if it scores at least `threshold`.
  std::optional<RetrievalHit> retrieve_with_rejection(std::string_view query, double threshold,
                                                      std::size_t rank_offset = 1) const;

  std::size_t size() const { return doc_vectors_.size(); }
  std::size_t vocabulary_size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }
  std::optional<std::uint32_t> dimension(const std::string& token) const;
  const std::vector<double>& idf() const { return idf_; }
  const SparseVector& doc_vector(std::size_t doc) const { return doc_vectors_.at(doc); }

  // SHA-256 over the persisted form; equal digests mean equal state.
  std::string state_digest() const;

  // Text sidecar: "booststep-tfidf 1" header, then terms with idf, then vectors.
  void save(std::ostream& out) const;
  static TfIdfIndex load(std::istream& in);

 private:
  std::unordered_map<std::string, std::uint32_t> vocabulary_;
  std::vector<std::string> terms_;
  std::vector<double> idf_;
  std::vector<SparseVector> doc_vectors_;
};

struct StepHit {
  RetrievalHit hit;
  const StepRecord* record = nullptr;
};

// Index over every step of a bank.
class StepRetriever {
 public:
  explicit StepRetriever(const ExampleBank& bank);

  std::optional<StepHit> retrieve_with_rejection(std::string_view query, double threshold,
                                                 std::size_t rank_offset = 1) const;
  std::vector<StepHit> retrieve(std::string_view query, std::size_t k,
                                std::size_t rank_offset = 1) const;

  const TfIdfIndex& index() const { return index_; }
  const std::vector<StepRecord>& records() const { return records_; }

 private:
  std::vector<StepRecord> records_;
  TfIdfIndex index_;
};

struct ProblemHit {
  RetrievalHit hit;
  const ExampleProblem* problem = nullptr;
};

// Index over problem statements, used by the problem-level few-shot baseline.
class ProblemRetriever {
 public:
  explicit ProblemRetriever(const ExampleBank& bank);

  std::vector<ProblemHit> retrieve(std::string_view query, std::size_t k,
                                   std::size_t rank_offset = 1) const;

  const TfIdfIndex& index() const { return index_; }

 private:
  std::vector<ExampleProblem> problems_;
  TfIdfIndex index_;
};

}  // namespace booststep
