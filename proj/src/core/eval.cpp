#include "core/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "core/error.hpp"
#include "core/stats.hpp"

namespace authdrift {
namespace {

double Ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

ConfusionMatrix Tally(std::span<const VerificationResult> results) {
  ConfusionMatrix cm;
  for (const auto& r : results) {
    if (r.label == 1) {
      (r.truth == 1 ? cm.tp : cm.fp) += 1;
    } else {
      (r.truth == 1 ? cm.fn : cm.tn) += 1;
    }
  }
  return cm;
}

Prf ComputePrf(const ConfusionMatrix& cm, int positive_class) {
  const std::uint64_t tp = positive_class == 1 ? cm.tp : cm.tn;
  const std::uint64_t fp = positive_class == 1 ? cm.fp : cm.fn;
  const std::uint64_t fn = positive_class == 1 ? cm.fn : cm.fp;
  Prf out;
  out.precision = Ratio(tp, tp + fp);
  out.recall = Ratio(tp, tp + fn);
  const double sum = out.precision + out.recall;
  out.f1 = sum > 0.0 ? 2.0 * out.precision * out.recall / sum : 0.0;
  return out;
}

std::vector<EvaluatedSample> JoinResults(const std::vector<VerificationResult>& results,
                                         const PairDataset& dataset, std::size_t run) {
  std::unordered_map<std::string, const VerificationResult*> by_id;
  for (const auto& r : results) {
    if (!by_id.emplace(r.sample_id, &r).second) {
      Fail(ErrorKind::kConstraint, "duplicate result for sample '" + r.sample_id + "'");
    }
  }
  std::vector<EvaluatedSample> out;
  out.reserve(dataset.samples.size());
  for (const auto& s : dataset.samples) {
    auto it = by_id.find(s.sample_id);
    if (it == by_id.end()) {
      Fail(ErrorKind::kConstraint, "no result for sample '" + s.sample_id + "' of set '" +
                                       dataset.header.set_name + "'");
    }
    if (it->second->truth != s.label) {
      Fail(ErrorKind::kConstraint, "result for '" + s.sample_id + "' disagrees with the dataset label");
    }
    out.push_back(EvaluatedSample{*it->second, run, s.category, s.author1, s.author2, s.year1, s.year2});
    by_id.erase(it);
  }
  if (!by_id.empty()) {
    std::set<std::string> extra;
    for (const auto& [id, r] : by_id) extra.insert(id);
    Fail(ErrorKind::kConstraint, "result for unknown sample '" + *extra.begin() + "'");
  }
  return out;
}

std::vector<VerificationResult> ResultsOf(std::span<const EvaluatedSample> samples) {
  std::vector<VerificationResult> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.result);
  return out;
}

namespace {

void CheckSameSamples(const std::vector<std::vector<EvaluatedSample>>& runs) {
  if (runs.empty()) return;
  std::multiset<std::string> reference;
  for (const auto& s : runs.front()) reference.insert(s.result.sample_id);
  for (std::size_t k = 1; k < runs.size(); ++k) {
    std::multiset<std::string> ids;
    for (const auto& s : runs[k]) ids.insert(s.result.sample_id);
    if (ids != reference) {
      Fail(ErrorKind::kConstraint,
           "run " + std::to_string(k) + " was evaluated on a different dataset than run 0");
    }
  }
}

}  // namespace

std::vector<EvaluatedSample> PoolRuns(const std::vector<std::vector<EvaluatedSample>>& runs) {
  CheckSameSamples(runs);
  std::vector<EvaluatedSample> pooled;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    for (auto s : runs[k]) {
      s.run = k;
      pooled.push_back(std::move(s));
    }
  }
  return pooled;
}

std::vector<EvaluatedSample> MajorityVote(const std::vector<std::vector<EvaluatedSample>>& runs) {
  CheckSameSamples(runs);
  if (runs.empty()) return {};
  std::map<std::string, std::size_t> ones;
  for (const auto& run : runs) {
    for (const auto& s : run) ones[s.result.sample_id] += s.result.label == 1 ? 1 : 0;
  }
  const double n = static_cast<double>(runs.size());
  std::vector<EvaluatedSample> out = runs.front();
  for (auto& s : out) {
    const double share = static_cast<double>(ones[s.result.sample_id]) / n;
    s.run = 0;
    s.result.score = share;
    s.result.label = share > 0.5 ? 1 : 0;
    s.result.confidence = s.result.label == 1 ? share : 1.0 - share;
  }
  return out;
}

std::vector<CategoryStat> ByCategory(std::span<const EvaluatedSample> samples) {
  std::array<std::size_t, 5> n{};
  std::array<std::size_t, 5> correct{};
  std::array<double, 5> confidence{};
  for (const auto& s : samples) {
    const auto c = static_cast<std::size_t>(s.category);
    ++n[c];
    correct[c] += s.Correct() ? 1 : 0;
    confidence[c] += s.result.confidence;
  }
  std::vector<CategoryStat> out;
  for (auto cat : kCategories) {
    const auto c = static_cast<std::size_t>(cat);
    if (n[c] == 0) continue;
    out.push_back({cat, n[c], Ratio(correct[c], n[c]), confidence[c] / static_cast<double>(n[c])});
  }
  return out;
}

std::string_view ToString(Polarity p) {
  return p == Polarity::kSameAuthor ? "same_author" : "different_author";
}

std::vector<DistanceBucket> ByDistance(std::span<const EvaluatedSample> samples, Polarity polarity,
                                       int bucket_width) {
  if (bucket_width < 1) Fail(ErrorKind::kInvalidArgument, "bucket width must be >= 1");
  struct Acc {
    std::size_t n = 0;
    std::size_t correct = 0;
    double confidence = 0.0;
  };
  std::map<int, Acc> buckets;
  for (const auto& s : samples) {
    if (s.category == Category::kSameDoc) continue;
    const bool same = IsSameAuthor(s.category);
    if (same != (polarity == Polarity::kSameAuthor)) continue;
    auto& acc = buckets[(s.Delta() / bucket_width) * bucket_width];
    ++acc.n;
    acc.correct += s.Correct() ? 1 : 0;
    acc.confidence += s.result.confidence;
  }
  std::vector<DistanceBucket> out;
  for (const auto& [delta, acc] : buckets) {
    out.push_back({delta, acc.n, Ratio(acc.correct, acc.n),
                   acc.confidence / static_cast<double>(acc.n)});
  }
  return out;
}

CorrelationStat Pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) Fail(ErrorKind::kInvalidArgument, "series lengths differ");
  const std::size_t n = xs.size();
  if (n < 3) Fail(ErrorKind::kUndefined, "correlation needs at least 3 points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    Fail(ErrorKind::kUndefined, "correlation undefined: a series has zero variance");
  }
  CorrelationStat out;
  out.n = n;
  out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double dof = static_cast<double>(n - 2);
  const double one_minus = 1.0 - out.r * out.r;
  out.p = one_minus <= 0.0 ? 0.0
                           : stats::StudentTTwoTailed(out.r * std::sqrt(dof / one_minus), dof);
  return out;
}

std::string_view ToString(McNemarMethod m) {
  switch (m) {
    case McNemarMethod::kAuto: return "auto";
    case McNemarMethod::kChiSquare: return "chi2";
    case McNemarMethod::kExact: return "exact";
  }
  return "unknown";
}

McNemarMethod ParseMcNemarMethod(std::string_view name) {
  if (name == "auto") return McNemarMethod::kAuto;
  if (name == "chi2") return McNemarMethod::kChiSquare;
  if (name == "exact") return McNemarMethod::kExact;
  Fail(ErrorKind::kInvalidArgument, "unknown McNemar method '" + std::string(name) + "'");
}

McNemarResult McNemarFromCounts(std::uint64_t b, std::uint64_t c, McNemarMethod method) {
  McNemarResult out;
  out.b = b;
  out.c = c;
  const std::uint64_t n = b + c;
  if (n == 0) {
    out.statistic = 0.0;
    out.p = 1.0;
    out.method = method == McNemarMethod::kExact ? McNemarMethod::kExact : McNemarMethod::kChiSquare;
    return out;
  }
  const double diff = std::abs(static_cast<double>(b) - static_cast<double>(c));
  const double corrected = std::max(0.0, diff - 1.0);
  out.statistic = corrected * corrected / static_cast<double>(n);
  const bool exact = method == McNemarMethod::kExact ||
                     (method == McNemarMethod::kAuto && n < kMcNemarExactBelow);
  if (exact) {
    out.method = McNemarMethod::kExact;
    out.p = stats::BinomialTwoTailedHalf(b, n);
  } else {
    out.method = McNemarMethod::kChiSquare;
    out.p = stats::ChiSquare1Survival(out.statistic);
  }
  return out;
}

McNemarResult McNemar(std::span<const EvaluatedSample> a, std::span<const EvaluatedSample> b,
                      McNemarMethod method) {
  std::map<std::pair<std::size_t, std::string>, bool> b_correct;
  for (const auto& s : b) {
    if (!b_correct.emplace(std::make_pair(s.run, s.result.sample_id), s.Correct()).second) {
      Fail(ErrorKind::kConstraint, "classifier B has two decisions for '" + s.result.sample_id + "'");
    }
  }
  if (a.size() != b.size()) {
    Fail(ErrorKind::kConstraint, "McNemar needs both classifiers on identical samples");
  }
  std::uint64_t only_a = 0;
  std::uint64_t only_b = 0;
  for (const auto& s : a) {
    auto it = b_correct.find({s.run, s.result.sample_id});
    if (it == b_correct.end()) {
      Fail(ErrorKind::kConstraint, "classifier B has no decision for '" + s.result.sample_id + "'");
    }
    const bool ok_a = s.Correct();
    if (ok_a && !it->second) ++only_a;
    if (!ok_a && it->second) ++only_b;
  }
  return McNemarFromCounts(only_a, only_b, method);
}

}  // namespace authdrift
