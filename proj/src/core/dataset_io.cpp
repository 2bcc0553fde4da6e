#include "core/dataset_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"

namespace authdrift {
namespace {

using ojson = nlohmann::ordered_json;
using nlohmann::json;

ojson HeaderToJson(const DatasetHeader& h) {
  ojson quotas = ojson::object();
  for (auto c : kCategories) quotas[std::string(ToString(c))] = h.quotas[static_cast<std::size_t>(c)];
  ojson j;
  j["format"] = kDatasetFormat;
  j["set"] = h.set_name;
  j["master_seed"] = h.master_seed;
  j["seed"] = h.seed;
  j["horizon"] = h.horizon;
  j["quotas"] = quotas;
  j["tokenizer"] = std::string(ToString(h.tokenizer.unit));
  j["truncation"] = {{"max_combined", h.truncation.max_combined},
                     {"reserve", h.truncation.reserve},
                     {"per_side", h.truncation.PerSideBudget()}};
  j["focus_author"] = h.focus_author;
  return j;
}

DatasetHeader HeaderFromJson(const json& j) {
  if (j.value("format", "") != kDatasetFormat) {
    Fail(ErrorKind::kParse, "unsupported dataset format '" + j.value("format", "") + "'");
  }
  DatasetHeader h;
  h.set_name = j.at("set").get<std::string>();
  h.seed = j.at("seed").get<std::uint64_t>();
  h.master_seed = j.value("master_seed", h.seed);
  h.horizon = j.at("horizon").get<int>();
  for (const auto& [cat, v] : j.at("quotas").items()) {
    h.quotas[static_cast<std::size_t>(ParseCategory(cat))] = v.get<std::size_t>();
  }
  h.tokenizer.unit = ParseTokenUnit(j.at("tokenizer").get<std::string>());
  h.truncation.max_combined = j.at("truncation").at("max_combined").get<int>();
  h.truncation.reserve = j.at("truncation").at("reserve").get<int>();
  h.focus_author = j.value("focus_author", "");
  return h;
}

ojson SampleToJson(const PairSample& s) {
  ojson j;
  j["sample_id"] = s.sample_id;
  j["author1"] = s.author1;
  j["year1"] = s.year1;
  j["doc1"] = s.doc1;
  j["para_index1"] = s.para_index1;
  j["paragraph1"] = s.para1;
  j["author2"] = s.author2;
  j["year2"] = s.year2;
  j["doc2"] = s.doc2;
  j["para_index2"] = s.para_index2;
  j["paragraph2"] = s.para2;
  j["joined"] = s.Joined();
  j["label"] = s.label;
  j["category"] = std::string(ToString(s.category));
  return j;
}

PairSample SampleFromJson(const json& j) {
  PairSample s;
  s.sample_id = j.at("sample_id").get<std::string>();
  s.author1 = j.at("author1").get<std::string>();
  s.year1 = j.at("year1").get<int>();
  s.doc1 = j.at("doc1").get<std::string>();
  s.para_index1 = j.at("para_index1").get<std::uint32_t>();
  s.para1 = j.at("paragraph1").get<std::string>();
  s.author2 = j.at("author2").get<std::string>();
  s.year2 = j.at("year2").get<int>();
  s.doc2 = j.at("doc2").get<std::string>();
  s.para_index2 = j.at("para_index2").get<std::uint32_t>();
  s.para2 = j.at("paragraph2").get<std::string>();
  s.label = j.at("label").get<int>();
  s.category = ParseCategory(j.at("category").get<std::string>());
  return s;
}

template <typename Fn>
void ForEachJsonLine(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      fn(json::parse(line), line_no);
    } catch (const json::exception& e) {
      Fail(ErrorKind::kParse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      Fail(e.kind(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFileAtomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorKind::kIo, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) Fail(ErrorKind::kIo, "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void WriteDataset(const PairDataset& dataset, const std::filesystem::path& path) {
  std::string out;
  out += ojson{{"header", HeaderToJson(dataset.header)}}.dump();
  out += '\n';
  for (const auto& s : dataset.samples) {
    out += SampleToJson(s).dump();
    out += '\n';
  }
  WriteFileAtomic(path, out);
}

PairDataset ReadDataset(const std::filesystem::path& path) {
  PairDataset dataset;
  bool have_header = false;
  std::set<std::string> ids;
  ForEachJsonLine(path, [&](const json& j, std::size_t) {
    if (!have_header) {
      if (!j.contains("header")) Fail(ErrorKind::kParse, "first line must be the dataset header");
      dataset.header = HeaderFromJson(j["header"]);
      have_header = true;
      return;
    }
    PairSample s = SampleFromJson(j);
    ValidateSample(s, dataset.header.horizon);
    if (!ids.insert(s.sample_id).second) {
      Fail(ErrorKind::kConstraint, "duplicate sample_id '" + s.sample_id + "'");
    }
    dataset.samples.push_back(std::move(s));
  });
  if (!have_header) Fail(ErrorKind::kParse, path.string() + ": empty dataset file");
  return dataset;
}

void WriteResults(const std::vector<VerificationResult>& results, const std::filesystem::path& path) {
  std::string out;
  for (const auto& r : results) {
    ojson j;
    j["sample_id"] = r.sample_id;
    j["truth"] = r.truth;
    j["label"] = r.label;
    j["score"] = r.score;
    j["confidence"] = r.confidence;
    out += j.dump();
    out += '\n';
  }
  WriteFileAtomic(path, out);
}

std::vector<VerificationResult> ReadResults(const std::filesystem::path& path) {
  std::vector<VerificationResult> results;
  std::set<std::string> ids;
  ForEachJsonLine(path, [&](const json& j, std::size_t) {
    VerificationResult r;
    r.sample_id = j.at("sample_id").get<std::string>();
    r.truth = j.at("truth").get<int>();
    r.label = j.at("label").get<int>();
    r.score = j.at("score").get<double>();
    r.confidence = j.at("confidence").get<double>();
    if ((r.label != 0 && r.label != 1) || (r.truth != 0 && r.truth != 1)) {
      Fail(ErrorKind::kParse, "labels must be 0 or 1");
    }
    if (!(r.confidence >= 0.0 && r.confidence <= 1.0)) {
      Fail(ErrorKind::kParse, "confidence outside [0, 1]");
    }
    if (!ids.insert(r.sample_id).second) {
      Fail(ErrorKind::kConstraint, "duplicate sample_id '" + r.sample_id + "'");
    }
    results.push_back(std::move(r));
  });
  return results;
}

void WriteSplit(const AuthorSplit& split, const AuthorGroups& groups,
                const std::filesystem::path& path) {
  ojson j;
  j["seed"] = split.seed;
  for (Split s : {Split::kTrain, Split::kDev, Split::kTest}) {
    j["splits"][std::string(ToString(s))] = split[s];
  }
  j["groups"] = {{"single_document", groups.single_document},
                 {"within_horizon", groups.within_horizon},
                 {"beyond_horizon", groups.beyond_horizon}};
  j["warnings"] = split.warnings;
  WriteFileAtomic(path, j.dump(2) + "\n");
}

}  // namespace authdrift
