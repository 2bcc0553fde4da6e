#include "core/pairgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace authdrift {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 5> kCategoryNames = {
    "SAME_DOC", "SAME_AUTH_NEAR", "SAME_AUTH_FAR", "DIFF_AUTH_NEAR", "DIFF_AUTH_FAR"};

constexpr std::size_t kRejectionFactor = 100;

bool IsNear(int year1, int year2, int horizon) { return std::abs(year1 - year2) <= horizon; }

bool IsNearCategory(Category c) {
  return c == Category::kSameAuthNear || c == Category::kDiffAuthNear;
}

using DocPair = std::pair<std::uint32_t, std::uint32_t>;

struct Draw {
  std::uint32_t doc1, para1, doc2, para2;
};

// Immutable eligibility tables for one set; samplers keep their own caches.
class Eligibility {
 public:
  Eligibility(const SegmentedCorpus& corpus, const SetRequest& request, int horizon)
      : corpus_(corpus), horizon_(horizon) {
    std::map<std::string_view, std::vector<std::uint32_t>> by_author;
    for (std::uint32_t i = 0; i < corpus.documents.size(); ++i) {
      const auto& d = corpus.documents[i];
      if (!d.paragraphs.empty()) by_author[d.author_id].push_back(i);
    }
    auto collect = [&](const std::vector<std::string>& ids) {
      std::vector<std::vector<std::uint32_t>> out;
      std::set<std::string_view> unique(ids.begin(), ids.end());
      for (auto id : unique) {
        auto it = by_author.find(id);
        if (it != by_author.end()) out.push_back(it->second);
      }
      return out;
    };
    if (request.focus_author.empty()) {
      first_ = collect(request.authors);
      second_ = first_;
    } else {
      first_ = collect({request.focus_author});
      std::vector<std::string> others;
      for (const auto& a : request.authors) {
        if (a != request.focus_author) others.push_back(a);
      }
      second_ = collect(others);
    }

    for (std::uint32_t a = 0; a < first_.size(); ++a) {
      std::vector<std::uint32_t> docs;
      for (auto d : first_[a]) {
        if (corpus.documents[d].paragraphs.size() >= 2) docs.push_back(d);
      }
      if (!docs.empty()) same_doc_.push_back(std::move(docs));

      for (bool near : {true, false}) {
        std::vector<DocPair> pairs;
        for (auto d1 : first_[a]) {
          for (auto d2 : first_[a]) {
            if (d1 != d2 && IsNear(Year(d1), Year(d2), horizon) == near) pairs.emplace_back(d1, d2);
          }
        }
        if (!pairs.empty()) (near ? same_near_ : same_far_).push_back(std::move(pairs));
      }
    }

    const bool focus = !request.focus_author.empty();
    for (std::uint32_t a = 0; a < first_.size(); ++a) {
      std::vector<std::uint32_t> near_partners;
      std::vector<std::uint32_t> far_partners;
      for (std::uint32_t b = 0; b < second_.size(); ++b) {
        if (!focus && a == b) continue;
        if (HasPair(first_[a], second_[b], true)) near_partners.push_back(b);
        if (HasPair(first_[a], second_[b], false)) far_partners.push_back(b);
      }
      if (!near_partners.empty()) diff_near_.emplace_back(a, std::move(near_partners));
      if (!far_partners.empty()) diff_far_.emplace_back(a, std::move(far_partners));
    }
  }

  bool Eligible(Category c) const {
    switch (c) {
      case Category::kSameDoc: return !same_doc_.empty();
      case Category::kSameAuthNear: return !same_near_.empty();
      case Category::kSameAuthFar: return !same_far_.empty();
      case Category::kDiffAuthNear: return !diff_near_.empty();
      case Category::kDiffAuthFar: return !diff_far_.empty();
    }
    return false;
  }

  int Year(std::uint32_t doc) const { return corpus_.documents[doc].year; }
  std::size_t ParagraphCount(std::uint32_t doc) const {
    return corpus_.documents[doc].paragraphs.size();
  }

  const std::vector<std::vector<std::uint32_t>>& same_doc() const { return same_doc_; }
  const std::vector<std::vector<DocPair>>& same_pairs(bool near) const {
    return near ? same_near_ : same_far_;
  }
  const std::vector<std::pair<std::uint32_t, std::vector<std::uint32_t>>>& diff_partners(
      bool near) const {
    return near ? diff_near_ : diff_far_;
  }

  std::vector<DocPair> CrossPairs(std::uint32_t a, std::uint32_t b, bool near) const {
    std::vector<DocPair> pairs;
    for (auto d1 : first_[a]) {
      for (auto d2 : second_[b]) {
        if (IsNear(Year(d1), Year(d2), horizon_) == near) pairs.emplace_back(d1, d2);
      }
    }
    return pairs;
  }

 private:
  bool HasPair(const std::vector<std::uint32_t>& xs, const std::vector<std::uint32_t>& ys,
               bool near) const {
    for (auto x : xs) {
      for (auto y : ys) {
        if (IsNear(Year(x), Year(y), horizon_) == near) return true;
      }
    }
    return false;
  }

  const SegmentedCorpus& corpus_;
  int horizon_;
  std::vector<std::vector<std::uint32_t>> first_;
  std::vector<std::vector<std::uint32_t>> second_;
  std::vector<std::vector<std::uint32_t>> same_doc_;
  std::vector<std::vector<DocPair>> same_near_;
  std::vector<std::vector<DocPair>> same_far_;
  std::vector<std::pair<std::uint32_t, std::vector<std::uint32_t>>> diff_near_;
  std::vector<std::pair<std::uint32_t, std::vector<std::uint32_t>>> diff_far_;
};

class CategorySampler {
 public:
  CategorySampler(const Eligibility& eligibility, Category category)
      : el_(eligibility), category_(category) {}

  Draw Sample(Rng& rng) {
    DocPair docs;
    switch (category_) {
      case Category::kSameDoc: {
        const auto& author_docs = el_.same_doc()[rng.Below(el_.same_doc().size())];
        const auto doc = author_docs[rng.Below(author_docs.size())];
        const auto n = el_.ParagraphCount(doc);
        const auto p1 = static_cast<std::uint32_t>(rng.Below(n));
        auto p2 = static_cast<std::uint32_t>(rng.Below(n - 1));
        if (p2 >= p1) ++p2;
        return {doc, p1, doc, p2};
      }
      case Category::kSameAuthNear:
      case Category::kSameAuthFar: {
        const auto& lists = el_.same_pairs(IsNearCategory(category_));
        const auto& pairs = lists[rng.Below(lists.size())];
        docs = pairs[rng.Below(pairs.size())];
        break;
      }
      case Category::kDiffAuthNear:
      case Category::kDiffAuthFar: {
        const bool near = IsNearCategory(category_);
        const auto& partners = el_.diff_partners(near);
        const auto& [a, bs] = partners[rng.Below(partners.size())];
        const auto b = bs[rng.Below(bs.size())];
        auto key = std::make_pair(a, b);
        auto it = cross_cache_.find(key);
        if (it == cross_cache_.end()) {
          it = cross_cache_.emplace(key, el_.CrossPairs(a, b, near)).first;
        }
        docs = it->second[rng.Below(it->second.size())];
        break;
      }
    }
    const auto p1 = static_cast<std::uint32_t>(rng.Below(el_.ParagraphCount(docs.first)));
    const auto p2 = static_cast<std::uint32_t>(rng.Below(el_.ParagraphCount(docs.second)));
    return {docs.first, p1, docs.second, p2};
  }

 private:
  const Eligibility& el_;
  Category category_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<DocPair>> cross_cache_;
};

std::array<std::uint32_t, 4> UnorderedKey(const Draw& d) {
  if (std::tie(d.doc1, d.para1) <= std::tie(d.doc2, d.para2)) return {d.doc1, d.para1, d.doc2, d.para2};
  return {d.doc2, d.para2, d.doc1, d.para1};
}

std::vector<Draw> SampleCategory(const Eligibility& eligibility, Category category,
                                 std::size_t quota, const std::string& set_name,
                                 std::uint64_t seed) {
  std::vector<Draw> draws;
  if (quota == 0) return draws;
  if (!eligibility.Eligible(category)) {
    Fail(ErrorKind::kConstraint, "unsatisfiable quota for " + std::string(ToString(category)) +
                                     " in set '" + set_name + "': no eligible document pairs");
  }
  Rng rng(seed);
  CategorySampler sampler(eligibility, category);
  std::set<std::array<std::uint32_t, 4>> seen;
  const std::size_t cap = kRejectionFactor * quota;
  std::size_t attempts = 0;
  while (draws.size() < quota) {
    if (attempts++ >= cap) {
      Fail(ErrorKind::kConstraint,
           "unsatisfiable quota for " + std::string(ToString(category)) + " in set '" + set_name +
               "': " + std::to_string(draws.size()) + " of " + std::to_string(quota) +
               " unique pairs after " + std::to_string(cap) + " attempts");
    }
    const Draw d = sampler.Sample(rng);
    if (seen.insert(UnorderedKey(d)).second) draws.push_back(d);
  }
  return draws;
}

}  // namespace

std::string_view ToString(Category category) {
  return kCategoryNames[static_cast<std::size_t>(category)];
}

Category ParseCategory(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == name) return static_cast<Category>(i);
  }
  Fail(ErrorKind::kParse, "unknown sample category '" + std::string(name) + "'");
}

Category CategorizePair(const PairEndpoint& first, const PairEndpoint& second, int horizon) {
  if (first.doc_id == second.doc_id) {
    if (first.author_id != second.author_id) {
      Fail(ErrorKind::kConstraint, "document '" + std::string(first.doc_id) +
                                       "' carries two different authors");
    }
    return Category::kSameDoc;
  }
  const bool near = IsNear(first.year, second.year, horizon);
  if (first.author_id == second.author_id) {
    return near ? Category::kSameAuthNear : Category::kSameAuthFar;
  }
  return near ? Category::kDiffAuthNear : Category::kDiffAuthFar;
}

AuthorGroups GroupAuthors(const SegmentedCorpus& corpus, int horizon,
                          const std::vector<std::string>& excluded) {
  const std::set<std::string> skip(excluded.begin(), excluded.end());
  std::map<std::string, std::vector<int>> years;
  for (const auto& d : corpus.documents) {
    if (d.paragraphs.empty() || skip.contains(d.author_id)) continue;
    years[d.author_id].push_back(d.year);
  }
  AuthorGroups groups;
  for (const auto& [author, ys] : years) {
    if (ys.size() == 1) {
      groups.single_document.push_back(author);
      continue;
    }
    const auto [lo, hi] = std::minmax_element(ys.begin(), ys.end());
    (*hi - *lo <= horizon ? groups.within_horizon : groups.beyond_horizon).push_back(author);
  }
  return groups;
}

std::string_view ToString(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "unknown";
}

void SplitRatios::Validate() const {
  for (double r : AsArray()) {
    if (!(r >= 0.0) || r > 1.0) Fail(ErrorKind::kInvalidArgument, "split ratios must lie in [0, 1]");
  }
  if (std::abs(train + dev + test - 1.0) > 1e-9) {
    Fail(ErrorKind::kInvalidArgument, "split ratios must sum to 1");
  }
}

std::array<std::size_t, 3> Apportion(std::size_t n, const SplitRatios& ratios) {
  ratios.Validate();
  const auto r = ratios.AsArray();
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = static_cast<double>(n) * r[i];
    sizes[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b] + 1e-12; });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % 3) {
    if (r[order[k]] > 0.0) {
      ++sizes[order[k]];
      ++assigned;
    }
  }
  return sizes;
}

AuthorSplit SplitAuthors(const AuthorGroups& groups, const SplitRatios& ratios, std::uint64_t seed) {
  ratios.Validate();
  AuthorSplit split;
  split.seed = seed;
  std::size_t active_splits = 0;
  for (double r : ratios.AsArray()) active_splits += r > 0.0 ? 1 : 0;

  const std::array<const std::vector<std::string>*, 3> all = {
      &groups.single_document, &groups.within_horizon, &groups.beyond_horizon};
  constexpr std::array<std::string_view, 3> kGroupNames = {"single-document", "within-horizon",
                                                           "beyond-horizon"};
  for (std::size_t g = 0; g < all.size(); ++g) {
    std::vector<std::string> authors = *all[g];
    std::sort(authors.begin(), authors.end());
    if (authors.empty()) continue;
    if (authors.size() < active_splits) {
      split.warnings.push_back(std::string(kGroupNames[g]) + " group has " +
                               std::to_string(authors.size()) +
                               " author(s), fewer than the number of splits; all assigned to train");
      for (auto& a : authors) split.members[0].push_back(std::move(a));
      continue;
    }
    Rng rng(DeriveSeed(seed, static_cast<std::uint64_t>(g)));
    rng.Shuffle(authors);
    const auto sizes = Apportion(authors.size(), ratios);
    std::size_t pos = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t k = 0; k < sizes[s]; ++k) split.members[s].push_back(authors[pos++]);
    }
  }
  for (auto& m : split.members) std::sort(m.begin(), m.end());
  return split;
}

QuotaSpec QuotaSpec::Reference(double scale) {
  auto row = [scale](std::size_t pos, std::size_t neg) {
    const auto p = static_cast<std::size_t>(std::llround(static_cast<double>(pos) * scale));
    const auto n = static_cast<std::size_t>(std::llround(static_cast<double>(neg) * scale));
    return CategoryCounts{p, p, p, n, n};
  };
  QuotaSpec spec;
  spec.sets["train"] = row(6000, 9000);
  spec.sets["dev"] = row(400, 600);
  spec.sets["test"] = row(600, 900);
  spec.sets["focus"] = row(600, 900);
  return spec;
}

void QuotaSpec::Validate() const {
  if (horizon < 0) Fail(ErrorKind::kInvalidArgument, "horizon must be >= 0");
  for (const auto& [name, counts] : sets) {
    if (name != "train" && name != "dev" && name != "test" && name != "focus") {
      Fail(ErrorKind::kInvalidArgument,
           "unknown quota set '" + name + "' (expected train, dev, test or focus)");
    }
    if (!include_same_doc && counts[0] != 0) {
      Fail(ErrorKind::kInvalidArgument,
           "set '" + name + "' requests SAME_DOC samples while include_same_doc is false");
    }
  }
}

QuotaSpec ParseQuotaSpec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    Fail(ErrorKind::kParse, std::string("quota spec: ") + e.what());
  }
  QuotaSpec spec;
  try {
    if (!doc.is_object()) Fail(ErrorKind::kParse, "quota spec: top level must be an object");
    spec.horizon = doc.value("horizon", kDefaultHorizon);
    spec.include_same_doc = doc.value("include_same_doc", true);
    if (!doc.contains("sets") || !doc["sets"].is_object()) {
      Fail(ErrorKind::kParse, "quota spec: missing object 'sets'");
    }
    for (const auto& [name, counts] : doc["sets"].items()) {
      CategoryCounts c{};
      for (const auto& [cat, value] : counts.items()) {
        if (!value.is_number_unsigned()) {
          Fail(ErrorKind::kParse, "quota spec: sets." + name + "." + cat +
                                      " must be a non-negative integer");
        }
        c[static_cast<std::size_t>(ParseCategory(cat))] = value.get<std::size_t>();
      }
      spec.sets[name] = c;
    }
  } catch (const json::exception& e) {
    Fail(ErrorKind::kParse, std::string("quota spec: ") + e.what());
  }
  spec.Validate();
  return spec;
}

std::string QuotaSpecToJson(const QuotaSpec& spec) {
  nlohmann::ordered_json doc;
  doc["horizon"] = spec.horizon;
  doc["include_same_doc"] = spec.include_same_doc;
  doc["sets"] = nlohmann::ordered_json::object();
  for (const auto& [name, counts] : spec.sets) {
    nlohmann::ordered_json row;
    for (auto c : kCategories) row[std::string(ToString(c))] = counts[static_cast<std::size_t>(c)];
    doc["sets"][name] = row;
  }
  return doc.dump(2);
}

std::string PairSample::Joined() const {
  std::string out;
  out.reserve(para1.size() + para2.size() + kSeparatorToken.size() + 2);
  out.append(para1).append(" ").append(kSeparatorToken).append(" ").append(para2);
  return out;
}

void ValidateSample(const PairSample& s, int horizon) {
  auto fail = [&](const std::string& what) {
    Fail(ErrorKind::kConstraint, "sample '" + s.sample_id + "': " + what);
  };
  if ((s.label == 1) != (s.author1 == s.author2)) fail("label disagrees with authors");
  const Category expected = CategorizePair({s.author1, s.year1, s.doc1},
                                           {s.author2, s.year2, s.doc2}, horizon);
  if (expected != s.category) {
    fail("category " + std::string(ToString(s.category)) + " disagrees with metadata (" +
         std::string(ToString(expected)) + ")");
  }
  if (s.category == Category::kSameDoc && s.para_index1 == s.para_index2) {
    fail("same-document pair repeats one paragraph");
  }
}

PairDataset GeneratePairs(const SegmentedCorpus& corpus, const SetRequest& request, int horizon,
                          const TruncationPolicy& truncation, std::uint64_t seed) {
  truncation.Validate();
  const Eligibility eligibility(corpus, request, horizon);

  std::array<std::vector<Draw>, 5> draws;
  ParallelFor(kCategories.size(), [&](std::size_t c) {
    draws[c] = SampleCategory(eligibility, kCategories[c], request.quotas[c], request.name,
                              DeriveSeed(seed, static_cast<std::uint64_t>(c)));
  });

  PairDataset dataset;
  dataset.header.set_name = request.name;
  dataset.header.master_seed = seed;
  dataset.header.seed = seed;
  dataset.header.horizon = horizon;
  dataset.header.quotas = request.quotas;
  dataset.header.tokenizer = corpus.tokenizer;
  dataset.header.truncation = truncation;
  dataset.header.focus_author = request.focus_author;

  for (std::size_t c = 0; c < kCategories.size(); ++c) {
    for (const Draw& d : draws[c]) {
      const auto& doc1 = corpus.documents[d.doc1];
      const auto& doc2 = corpus.documents[d.doc2];
      const Paragraph& p1 = doc1.paragraphs[d.para1];
      const Paragraph& p2 = doc2.paragraphs[d.para2];
      auto [text1, text2] = TruncatePair(p1, p2, corpus.tokenizer, truncation);
      PairSample s;
      s.author1 = doc1.author_id;
      s.year1 = doc1.year;
      s.doc1 = doc1.doc_id;
      s.para_index1 = p1.index;
      s.para1 = std::move(text1);
      s.author2 = doc2.author_id;
      s.year2 = doc2.year;
      s.doc2 = doc2.doc_id;
      s.para_index2 = p2.index;
      s.para2 = std::move(text2);
      s.category = kCategories[c];
      s.label = IsSameAuthor(s.category) ? 1 : 0;
      ValidateSample(s, horizon);
      dataset.samples.push_back(std::move(s));
    }
  }
  Rng order(DeriveSeed(seed, "order"));
  order.Shuffle(dataset.samples);
  const int width = std::max<int>(6, static_cast<int>(std::to_string(dataset.samples.size()).size()));
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    std::string num = std::to_string(i);
    dataset.samples[i].sample_id =
        request.name + "-" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num;
  }
  return dataset;
}

PairgenOutput RunPairgen(const SegmentedCorpus& corpus, const PairgenPlan& plan) {
  plan.quotas.Validate();
  plan.ratios.Validate();
  for (const auto& author : plan.focus_authors) {
    const bool known = std::any_of(corpus.documents.begin(), corpus.documents.end(),
                                   [&](const CorpusDocument& d) { return d.author_id == author; });
    if (!known) Fail(ErrorKind::kInvalidArgument, "focus author '" + author + "' is not in the corpus");
  }
  PairgenOutput out;
  out.groups = GroupAuthors(corpus, plan.quotas.horizon, plan.focus_authors);
  out.split = SplitAuthors(out.groups, plan.ratios, DeriveSeed(plan.seed, "split"));

  for (Split s : {Split::kTrain, Split::kDev, Split::kTest}) {
    const std::string name(ToString(s));
    auto it = plan.quotas.sets.find(name);
    if (it == plan.quotas.sets.end()) continue;
    SetRequest req{name, it->second, out.split[s], ""};
    out.datasets.push_back(
        GeneratePairs(corpus, req, plan.quotas.horizon, plan.truncation, DeriveSeed(plan.seed, name)));
  }
  if (!plan.focus_authors.empty()) {
    auto it = plan.quotas.sets.find("focus");
    if (it == plan.quotas.sets.end()) it = plan.quotas.sets.find("test");
    if (it == plan.quotas.sets.end()) {
      Fail(ErrorKind::kInvalidArgument, "focus authors need a 'focus' or 'test' quota set");
    }
    for (const auto& author : plan.focus_authors) {
      const std::string name = "focus-" + author;
      SetRequest req{name, it->second, out.split[Split::kTest], author};
      out.datasets.push_back(GeneratePairs(corpus, req, plan.quotas.horizon, plan.truncation,
                                           DeriveSeed(plan.seed, name)));
    }
  }
  for (auto& d : out.datasets) d.header.master_seed = plan.seed;
  return out;
}

}  // namespace authdrift
