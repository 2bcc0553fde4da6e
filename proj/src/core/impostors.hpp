#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/features.hpp"
#include "core/pairgen.hpp"
#include "core/results.hpp"
#include "core/similarity.hpp"

namespace authdrift {

struct ImpostorParams {
  int iterations = 100;
  double feature_fraction = 0.9;
  int pool_size = 100;
  int impostors_per_iter = 5;
  double threshold = 0.5;

  void Validate() const;
  // ceil(feature_fraction * vocab_size), clamped to [1, vocab_size].
  std::uint32_t FeaturesPerIteration(std::size_t vocab_size) const;
};

// label = score > threshold; confidence = max(score, 1 - score).
VerificationResult MakeResult(std::string sample_id, int truth, double score, double threshold);

// Candidate impostor text already vectorized, with its provenance.
struct ImpostorCandidate {
  std::string author_id;
  std::string doc_id;
  SparseVector vector;
};

// One verification problem in vector space. The pool is drawn once
// (pool_size of `candidates`); each iteration samples a feature subset and
// impostors_per_iter pool members. A round is won when the known text is
// strictly more similar to the disputed text than every sampled impostor.
// Returns the fraction of rounds won.
double ImpostorScore(const SparseVector& known, const SparseVector& disputed,
                     std::span<const SparseVector* const> candidates, std::size_t vocab_size,
                     const ImpostorParams& params, std::uint64_t seed);

class ImpostorsVerifier {
 public:
  // Candidate pool: distinct paragraphs of `pool_dataset`, vectorized once.
  ImpostorsVerifier(const FeatureModel& model, const PairDataset& pool_dataset,
                    ImpostorParams params);

  std::size_t pool_candidates() const { return candidates_.size(); }

  // para1 is the known text, para2 the disputed one. Candidates written by
  // either author of the sample are excluded.
  VerificationResult Verify(const PairSample& sample, std::uint64_t seed) const;

  // One result per sample; sample i uses a seed derived from (seed, i).
  std::vector<VerificationResult> RunTestset(const PairDataset& dataset, std::uint64_t seed) const;

 private:
  const FeatureModel& model_;
  ImpostorParams params_;
  std::vector<ImpostorCandidate> candidates_;
};

}  // namespace authdrift
