#include "core/impostors.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace authdrift {

void ImpostorParams::Validate() const {
  if (iterations < 1) Fail(ErrorKind::kInvalidArgument, "iterations must be >= 1");
  if (!(feature_fraction > 0.0 && feature_fraction <= 1.0)) {
    Fail(ErrorKind::kInvalidArgument, "feature_fraction must lie in (0, 1]");
  }
  if (pool_size < 1) Fail(ErrorKind::kInvalidArgument, "pool_size must be >= 1");
  if (impostors_per_iter < 1 || impostors_per_iter > pool_size) {
    Fail(ErrorKind::kInvalidArgument, "impostors_per_iter must lie in [1, pool_size]");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    Fail(ErrorKind::kInvalidArgument, "threshold must lie in [0, 1]");
  }
}

std::uint32_t ImpostorParams::FeaturesPerIteration(std::size_t vocab_size) const {
  // The epsilon keeps e.g. 0.9 * 10 from rounding up to 10 through 9.000...01.
  const double exact = feature_fraction * static_cast<double>(vocab_size);
  auto k = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  k = std::clamp<std::size_t>(k, 1, vocab_size);
  return static_cast<std::uint32_t>(k);
}

VerificationResult MakeResult(std::string sample_id, int truth, double score, double threshold) {
  VerificationResult r;
  r.sample_id = std::move(sample_id);
  r.truth = truth;
  r.score = score;
  r.label = score > threshold ? 1 : 0;
  r.confidence = std::max(score, 1.0 - score);
  return r;
}

double ImpostorScore(const SparseVector& known, const SparseVector& disputed,
                     std::span<const SparseVector* const> candidates, std::size_t vocab_size,
                     const ImpostorParams& params, std::uint64_t seed) {
  params.Validate();
  if (vocab_size == 0) Fail(ErrorKind::kInvalidArgument, "empty feature model");
  const auto pool_size = static_cast<std::uint32_t>(params.pool_size);
  if (candidates.size() < pool_size) {
    Fail(ErrorKind::kConstraint, "impostor pool has " + std::to_string(candidates.size()) +
                                     " candidates, fewer than pool_size " +
                                     std::to_string(pool_size));
  }
  Rng rng(seed);
  const auto pool = SampleSubset(rng, static_cast<std::uint32_t>(candidates.size()), pool_size);

  const auto n = static_cast<std::uint32_t>(vocab_size);
  const std::uint32_t keep = params.FeaturesPerIteration(vocab_size);
  // Draw whichever of the kept/dropped sets is smaller.
  const bool draw_dropped = n - keep < keep;
  std::vector<std::uint8_t> mask(n, draw_dropped ? 1 : 0);
  std::vector<std::uint8_t> scratch(n, 0);
  std::vector<std::uint8_t> pool_scratch(pool_size, 0);
  const auto per_iter = static_cast<std::uint32_t>(params.impostors_per_iter);

  int wins = 0;
  for (int it = 0; it < params.iterations; ++it) {
    const auto drawn = SampleSubset(rng, n, draw_dropped ? n - keep : keep, scratch);
    for (auto f : drawn) mask[f] = draw_dropped ? 0 : 1;
    const auto chosen = SampleSubset(rng, pool_size, per_iter, pool_scratch);

    const double target = MinMaxSimilarity(disputed, known, mask);
    bool won = true;
    for (auto c : chosen) {
      if (!(target > MinMaxSimilarity(disputed, *candidates[pool[c]], mask))) {
        won = false;
        break;
      }
    }
    if (won) ++wins;
    for (auto f : drawn) mask[f] = draw_dropped ? 1 : 0;
  }
  return static_cast<double>(wins) / static_cast<double>(params.iterations);
}

ImpostorsVerifier::ImpostorsVerifier(const FeatureModel& model, const PairDataset& pool_dataset,
                                     ImpostorParams params)
    : model_(model), params_(params) {
  params_.Validate();
  if (model.vocab.size() == 0) Fail(ErrorKind::kInvalidArgument, "empty feature model");
  auto paragraphs = DistinctParagraphs(pool_dataset);
  candidates_.resize(paragraphs.size());
  ParallelFor(paragraphs.size(), [&](std::size_t i) {
    candidates_[i] = ImpostorCandidate{paragraphs[i].author_id, paragraphs[i].doc_id,
                                       Vectorize(paragraphs[i].text, model_)};
  });
}

VerificationResult ImpostorsVerifier::Verify(const PairSample& sample, std::uint64_t seed) const {
  std::vector<const SparseVector*> eligible;
  eligible.reserve(candidates_.size());
  for (const auto& c : candidates_) {
    if (c.author_id != sample.author1 && c.author_id != sample.author2) eligible.push_back(&c.vector);
  }
  const SparseVector known = Vectorize(sample.para1, model_);
  const SparseVector disputed = Vectorize(sample.para2, model_);
  const double score = ImpostorScore(known, disputed, eligible, model_.vocab.size(), params_, seed);
  return MakeResult(sample.sample_id, sample.label, score, params_.threshold);
}

std::vector<VerificationResult> ImpostorsVerifier::RunTestset(const PairDataset& dataset,
                                                              std::uint64_t seed) const {
  if (dataset.header.tokenizer != model_.tokenizer ||
      dataset.header.truncation != model_.truncation) {
    Fail(ErrorKind::kInvalidArgument,
         "test set '" + dataset.header.set_name +
             "' was built with a different tokenizer or truncation than the feature model");
  }
  std::vector<VerificationResult> results(dataset.samples.size());
  ParallelFor(dataset.samples.size(), [&](std::size_t i) {
    try {
      results[i] = Verify(dataset.samples[i], DeriveSeed(seed, static_cast<std::uint64_t>(i)));
    } catch (const Error& e) {
      Fail(e.kind(), "sample " + std::to_string(i) + " (" + dataset.samples[i].sample_id + "): " + e.what());
    }
  });
  return results;
}

}  // namespace authdrift
