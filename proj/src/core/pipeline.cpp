#include "core/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <map>
#include <set>

#include <json.hpp>

#include "core/dataset_io.hpp"
#include "core/error.hpp"
#include "core/eval.hpp"
#include "core/hashing.hpp"
#include "core/rng.hpp"
#include "core/synth.hpp"

namespace authdrift {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// Maps JSON pointers to the source line where the member or element starts.
// The text has already been accepted by the JSON parser, so this only needs
// to follow structure.
class LineIndex {
 public:
  explicit LineIndex(std::string_view text) : text_(text) { Value(""); }

  int Line(std::string pointer) const {
    for (;;) {
      auto it = lines_.find(pointer);
      if (it != lines_.end()) return it->second;
      const auto slash = pointer.rfind('/');
      if (slash == std::string::npos) return 1;
      pointer.resize(slash);
    }
  }

 private:
  void Skip() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                   text_[pos_] == '\r')) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  std::string String() {
    std::string out;
    ++pos_;  // opening quote
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
      out += text_[pos_++];
    }
    ++pos_;
    return out;
  }

  static std::string Escape(const std::string& key) {
    std::string out;
    for (char c : key) {
      if (c == '~') {
        out += "~0";
      } else if (c == '/') {
        out += "~1";
      } else {
        out += c;
      }
    }
    return out;
  }

  void Value(const std::string& pointer) {
    Skip();
    lines_.emplace(pointer, line_);
    if (pos_ >= text_.size()) return;
    const char c = text_[pos_];
    if (c == '{') {
      ++pos_;
      for (;;) {
        Skip();
        if (pos_ >= text_.size() || text_[pos_] == '}') break;
        if (text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        const int key_line = line_;
        const std::string child = pointer + "/" + Escape(String());
        lines_.emplace(child, key_line);
        Skip();
        ++pos_;  // colon
        Value(child);
      }
      ++pos_;
    } else if (c == '[') {
      ++pos_;
      std::size_t index = 0;
      for (;;) {
        Skip();
        if (pos_ >= text_.size() || text_[pos_] == ']') break;
        if (text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        Value(pointer + "/" + std::to_string(index++));
      }
      ++pos_;
    } else if (c == '"') {
      String();
    } else {
      while (pos_ < text_.size() && std::string_view(",]} \t\r\n").find(text_[pos_]) == std::string_view::npos) {
        ++pos_;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

// Typed, path-aware access to the config document.
class ConfigReader {
 public:
  ConfigReader(const json& root, const LineIndex& lines, std::string source)
      : root_(root), lines_(lines), source_(std::move(source)) {}

  [[noreturn]] void Error(const std::string& pointer, const std::string& message) const {
    Fail(ErrorKind::kInvalidArgument, source_ + ":" + std::to_string(lines_.Line(pointer)) + ": " +
                                          (pointer.empty() ? "/" : pointer) + ": " + message);
  }

  // Optional object member; rejects members not listed in `allowed`.
  const json* Section(const json& parent, const std::string& pointer, std::set<std::string> allowed) const {
    if (!parent.is_object()) Error(pointer, "expected an object");
    for (const auto& [key, value] : parent.items()) {
      if (!allowed.count(key)) Error(pointer + "/" + key, "unknown key");
    }
    return &parent;
  }

  const json* Find(const json& parent, const std::string& key) const {
    auto it = parent.find(key);
    return it == parent.end() || it->is_null() ? nullptr : &*it;
  }

  template <typename T>
  T Number(const json& parent, const std::string& pointer, const std::string& key, T fallback) const {
    const json* v = Find(parent, key);
    if (!v) return fallback;
    const std::string at = pointer + "/" + key;
    if constexpr (std::is_floating_point_v<T>) {
      if (!v->is_number()) Error(at, "expected a number");
      return v->get<T>();
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v->is_number_unsigned()) Error(at, "expected a non-negative integer");
      return v->get<T>();
    } else {
      if (!v->is_number_integer()) Error(at, "expected an integer");
      return v->get<T>();
    }
  }

  std::string String(const json& parent, const std::string& pointer, const std::string& key,
                     std::string fallback) const {
    const json* v = Find(parent, key);
    if (!v) return fallback;
    if (!v->is_string()) Error(pointer + "/" + key, "expected a string");
    return v->get<std::string>();
  }

  bool Bool(const json& parent, const std::string& pointer, const std::string& key, bool fallback) const {
    const json* v = Find(parent, key);
    if (!v) return fallback;
    if (!v->is_boolean()) Error(pointer + "/" + key, "expected true or false");
    return v->get<bool>();
  }

  const json& root() const { return root_; }

 private:
  const json& root_;
  const LineIndex& lines_;
  std::string source_;
};

const json& EmptyObject() {
  static const json kEmpty = json::object();
  return kEmpty;
}

const json& SectionOrEmpty(const ConfigReader& r, const json& parent, const std::string& pointer,
                           const std::string& key, std::set<std::string> allowed) {
  const json* v = r.Find(parent, key);
  if (!v) return EmptyObject();
  r.Section(*v, pointer + "/" + key, std::move(allowed));
  return *v;
}

// Runs `fn`, turning library errors into errors located at `pointer`.
template <typename Fn>
void Checked(const ConfigReader& r, const std::string& pointer, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    r.Error(pointer, e.what());
  }
}

std::string NowUtc() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// --- stage bookkeeping -------------------------------------------------------

class StageRunner {
 public:
  explicit StageRunner(fs::path out_dir) : out_dir_(std::move(out_dir)) {}

  // Runs `body` unless the stamp for `name` matches `key` and every output
  // still hashes to the recorded digest.
  template <typename Fn>
  void Run(const std::string& name, const std::string& key, const std::vector<fs::path>& outputs, Fn&& body) {
    const fs::path stamp = out_dir_ / ".stamps" / (name + ".json");
    bool skip = UpToDate(stamp, key, outputs);
    if (!skip) {
      try {
        body();
      } catch (const Error& e) {
        Fail(e.kind(), "stage '" + name + "' failed: " + e.what());
      } catch (const std::exception& e) {
        Fail(ErrorKind::kIo, "stage '" + name + "' failed: " + e.what());
      }
      ordered_json j;
      j["key"] = key;
      ordered_json hashes = ordered_json::object();
      for (const auto& out : outputs) hashes[Relative(out)] = Sha256File(out);
      j["outputs"] = hashes;
      WriteFileAtomic(stamp, j.dump(2) + "\n");
    }
    Log(LogLevel::kInfo, (skip ? "skipped stage " : "ran stage ") + name);
    records_.push_back({name, skip});
  }

  const std::vector<StageRecord>& records() const { return records_; }

 private:
  std::string Relative(const fs::path& p) const { return p.lexically_relative(out_dir_).generic_string(); }

  bool UpToDate(const fs::path& stamp, const std::string& key, const std::vector<fs::path>& outputs) const {
    std::error_code ec;
    if (!fs::exists(stamp, ec)) return false;
    json j;
    try {
      j = json::parse(ReadFile(stamp));
    } catch (const std::exception&) {
      return false;
    }
    if (!j.is_object() || j.value("key", "") != key) return false;
    const json& hashes = j.value("outputs", json::object());
    for (const auto& out : outputs) {
      auto it = hashes.find(Relative(out));
      if (it == hashes.end() || !fs::exists(out, ec) || *it != Sha256File(out)) return false;
    }
    return true;
  }

  fs::path out_dir_;
  std::vector<StageRecord> records_;
};

std::string StageKey(const ordered_json& config, const std::map<std::string, std::string>& inputs) {
  ordered_json j;
  j["config"] = config;
  j["inputs"] = inputs;
  j["version"] = AUTHDRIFT_VERSION;
  return Sha256Hex(j.dump());
}

std::string HashDocuments(const std::vector<Document>& docs) {
  std::string buf;
  for (const auto& d : docs) {
    buf += d.doc_id;
    buf += '\0';
    buf += d.author_id;
    buf += '\0';
    buf += std::to_string(d.year);
    buf += '\0';
    buf += Sha256Hex(d.text);
    buf += '\n';
  }
  return Sha256Hex(buf);
}

ordered_json ImpostorParamsJson(const ImpostorParams& p) {
  return {{"iterations", p.iterations},
          {"feature_fraction", p.feature_fraction},
          {"pool_size", p.pool_size},
          {"impostors_per_iter", p.impostors_per_iter},
          {"threshold", p.threshold}};
}

std::vector<std::string> SetNames(const PipelineConfig& config) {
  std::vector<std::string> names;
  for (const char* s : {"train", "dev", "test"}) {
    if (config.pairgen.quotas.sets.count(s)) names.emplace_back(s);
  }
  for (const auto& a : config.pairgen.focus_authors) names.push_back("focus-" + a);
  return names;
}

std::vector<std::string> TestSetNames(const PipelineConfig& config) {
  std::vector<std::string> names;
  if (config.pairgen.quotas.sets.count("test")) names.emplace_back("test");
  for (const auto& a : config.pairgen.focus_authors) names.push_back("focus-" + a);
  return names;
}

}  // namespace

PipelineConfig ParsePipelineConfig(std::string_view text, const fs::path& source, std::string_view overrides) {
  const std::string src = source.empty() ? std::string("<config>") : source.string();
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based; recover the line for the message.
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    Fail(ErrorKind::kParse, src + ":" + std::to_string(line) + ": malformed JSON: " + e.what());
  }
  if (!overrides.empty()) {
    try {
      root.merge_patch(json::parse(overrides));
    } catch (const json::parse_error& e) {
      Fail(ErrorKind::kParse, std::string("malformed override JSON: ") + e.what());
    }
  }
  const LineIndex lines(text);
  const ConfigReader r(root, lines, src);
  r.Section(root, "", {"out_dir", "seed", "corpus", "pairgen", "features", "impostors", "external", "eval"});

  PipelineConfig c;
  c.source = source;
  const fs::path base = source.has_parent_path() ? source.parent_path() : fs::path(".");
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  c.out_dir = resolve(r.String(root, "", "out_dir", "run"));
  const auto seed = r.Number<std::uint64_t>(root, "", "seed", 17);

  const json& corpus = SectionOrEmpty(r, root, "", "corpus", {"manifest", "tokenizer", "min_tokens"});
  const std::string manifest = r.String(corpus, "/corpus", "manifest", "");
  if (manifest.empty()) r.Error("/corpus/manifest", "required");
  c.manifest = resolve(manifest);
  Checked(r, "/corpus/tokenizer",
          [&] { c.tokenizer.unit = ParseTokenUnit(r.String(corpus, "/corpus", "tokenizer", "unicode_char")); });
  c.min_tokens = r.Number<std::size_t>(corpus, "/corpus", "min_tokens", 200);

  const json& pg = SectionOrEmpty(r, root, "", "pairgen",
                                  {"permutations", "seeds", "horizon", "include_same_doc", "ratios",
                                   "max_combined", "reserve", "quota_scale", "quotas", "focus_authors"});
  if (const json* seeds = r.Find(pg, "seeds")) {
    if (!seeds->is_array() || seeds->empty()) r.Error("/pairgen/seeds", "expected a non-empty array of seeds");
    for (std::size_t i = 0; i < seeds->size(); ++i) {
      if (!(*seeds)[i].is_number_unsigned()) {
        r.Error("/pairgen/seeds/" + std::to_string(i), "expected a non-negative integer");
      }
      c.permutation_seeds.push_back((*seeds)[i].get<std::uint64_t>());
    }
    if (r.Find(pg, "permutations")) r.Error("/pairgen/permutations", "give either seeds or permutations");
  } else {
    const auto n = r.Number<std::size_t>(pg, "/pairgen", "permutations", 3);
    if (n == 0) r.Error("/pairgen/permutations", "must be >= 1");
    for (std::size_t i = 0; i < n; ++i) c.permutation_seeds.push_back(seed + i);
  }
  if (std::set<std::uint64_t>(c.permutation_seeds.begin(), c.permutation_seeds.end()).size() !=
      c.permutation_seeds.size()) {
    r.Error("/pairgen/seeds", "permutation seeds must be distinct");
  }

  const double scale = r.Number<double>(pg, "/pairgen", "quota_scale", 1.0);
  if (!(scale > 0.0)) r.Error("/pairgen/quota_scale", "must be > 0");
  c.pairgen.quotas = QuotaSpec::Reference(scale);
  c.pairgen.quotas.horizon = r.Number<int>(pg, "/pairgen", "horizon", kDefaultHorizon);
  c.pairgen.quotas.include_same_doc = r.Bool(pg, "/pairgen", "include_same_doc", true);
  if (const json* quotas = r.Find(pg, "quotas")) {
    json spec = {{"horizon", c.pairgen.quotas.horizon},
                 {"include_same_doc", c.pairgen.quotas.include_same_doc},
                 {"sets", *quotas}};
    Checked(r, "/pairgen/quotas", [&] { c.pairgen.quotas = ParseQuotaSpec(spec.dump()); });
  } else if (!c.pairgen.quotas.include_same_doc) {
    for (auto& [name, counts] : c.pairgen.quotas.sets) counts[static_cast<std::size_t>(Category::kSameDoc)] = 0;
  }
  Checked(r, "/pairgen", [&] { c.pairgen.quotas.Validate(); });

  const json& ratios = SectionOrEmpty(r, pg, "/pairgen", "ratios", {"train", "dev", "test"});
  c.pairgen.ratios.train = r.Number<double>(ratios, "/pairgen/ratios", "train", 0.8);
  c.pairgen.ratios.dev = r.Number<double>(ratios, "/pairgen/ratios", "dev", 0.1);
  c.pairgen.ratios.test = r.Number<double>(ratios, "/pairgen/ratios", "test", 0.1);
  Checked(r, "/pairgen/ratios", [&] { c.pairgen.ratios.Validate(); });

  c.pairgen.truncation.max_combined = r.Number<std::size_t>(pg, "/pairgen", "max_combined", 512);
  c.pairgen.truncation.reserve = r.Number<std::size_t>(pg, "/pairgen", "reserve", 3);
  Checked(r, "/pairgen/max_combined", [&] { c.pairgen.truncation.Validate(); });

  if (const json* focus = r.Find(pg, "focus_authors")) {
    if (!focus->is_array()) r.Error("/pairgen/focus_authors", "expected an array of author ids");
    for (std::size_t i = 0; i < focus->size(); ++i) {
      if (!(*focus)[i].is_string()) r.Error("/pairgen/focus_authors/" + std::to_string(i), "expected a string");
      c.pairgen.focus_authors.push_back((*focus)[i].get<std::string>());
    }
  }
  if (!c.pairgen.quotas.sets.count("train")) r.Error("/pairgen/quotas", "a 'train' set is required");
  if (!c.pairgen.quotas.sets.count("test") && c.pairgen.focus_authors.empty()) {
    r.Error("/pairgen/quotas", "nothing to evaluate: no 'test' set and no focus authors");
  }

  const json& feats = SectionOrEmpty(r, root, "", "features", {"n", "max_size"});
  c.features.n = r.Number<int>(feats, "/features", "n", 2);
  c.features.max_size = r.Number<std::size_t>(feats, "/features", "max_size", 50000);
  Checked(r, "/features", [&] { c.features.Validate(); });

  const json& imp = SectionOrEmpty(r, root, "", "impostors",
                                   {"iterations", "feature_fraction", "pool_size", "impostors_per_iter", "threshold"});
  c.impostors.iterations = r.Number<int>(imp, "/impostors", "iterations", 100);
  c.impostors.feature_fraction = r.Number<double>(imp, "/impostors", "feature_fraction", 0.9);
  c.impostors.pool_size = r.Number<int>(imp, "/impostors", "pool_size", 100);
  c.impostors.impostors_per_iter = r.Number<int>(imp, "/impostors", "impostors_per_iter", 5);
  c.impostors.threshold = r.Number<double>(imp, "/impostors", "threshold", 0.5);
  Checked(r, "/impostors", [&] { c.impostors.Validate(); });

  if (const json* ext = r.Find(root, "external")) {
    r.Section(*ext, "/external", {"command", "url", "timeout", "window"});
    EndpointOptions e;
    e.command = r.String(*ext, "/external", "command", "");
    e.url = r.String(*ext, "/external", "url", "");
    if (e.command.empty() == e.url.empty()) r.Error("/external", "give exactly one of command or url");
    e.timeout_seconds = r.Number<double>(*ext, "/external", "timeout", 300.0);
    if (!(e.timeout_seconds > 0.0)) r.Error("/external/timeout", "must be > 0");
    e.window = r.Number<std::size_t>(*ext, "/external", "window", 64);
    if (e.window == 0) r.Error("/external/window", "must be >= 1");
    c.external = e;
  }

  const json& ev = SectionOrEmpty(r, root, "", "eval", {"mcnemar", "bucket_width"});
  Checked(r, "/eval/mcnemar",
          [&] { c.report.mcnemar = ParseMcNemarMethod(r.String(ev, "/eval", "mcnemar", "auto")); });
  c.report.bucket_width = r.Number<int>(ev, "/eval", "bucket_width", 1);
  if (c.report.bucket_width < 1) r.Error("/eval/bucket_width", "must be >= 1");

  // Snapshot of the resolved configuration.
  ordered_json snap;
  snap["out_dir"] = c.out_dir.generic_string();
  snap["corpus"] = {{"manifest", c.manifest.generic_string()},
                    {"tokenizer", std::string(ToString(c.tokenizer.unit))},
                    {"min_tokens", c.min_tokens}};
  snap["pairgen"] = {{"seeds", c.permutation_seeds},
                     {"ratios", {{"train", c.pairgen.ratios.train},
                                 {"dev", c.pairgen.ratios.dev},
                                 {"test", c.pairgen.ratios.test}}},
                     {"max_combined", c.pairgen.truncation.max_combined},
                     {"reserve", c.pairgen.truncation.reserve},
                     {"quotas", ordered_json::parse(QuotaSpecToJson(c.pairgen.quotas))},
                     {"focus_authors", c.pairgen.focus_authors}};
  snap["features"] = {{"n", c.features.n}, {"max_size", c.features.max_size}};
  snap["impostors"] = ImpostorParamsJson(c.impostors);
  if (c.external) {
    snap["external"] = {{"command", c.external->command},
                        {"url", c.external->url},
                        {"timeout", c.external->timeout_seconds},
                        {"window", c.external->window}};
  }
  snap["eval"] = {{"mcnemar", std::string(ToString(c.report.mcnemar))}, {"bucket_width", c.report.bucket_width}};
  c.snapshot = snap.dump();
  return c;
}

PipelineConfig LoadPipelineConfig(const fs::path& path, std::string_view overrides) {
  std::error_code ec;
  if (!fs::exists(path, ec)) Fail(ErrorKind::kIo, "config file not found: " + path.string());
  return ParsePipelineConfig(ReadFile(path), path, overrides);
}

PipelineSummary RunPipeline(const PipelineConfig& config) {
  const std::string started = NowUtc();
  const fs::path out = config.out_dir;
  fs::create_directories(out);
  StageRunner runner(out);
  const ordered_json snapshot = ordered_json::parse(config.snapshot);

  // ingest
  std::error_code ec;
  if (!fs::exists(config.manifest, ec)) {
    Fail(ErrorKind::kIo, "stage 'ingest' failed: manifest not found: " + config.manifest.string());
  }
  std::vector<Document> documents;
  try {
    documents = LoadManifest(config.manifest);
  } catch (const Error& e) {
    Fail(e.kind(), std::string("stage 'ingest' failed: ") + e.what());
  }
  const std::string corpus_hash = HashDocuments(documents);
  const fs::path corpus_path = out / "corpus.bin";
  runner.Run("ingest",
             StageKey(snapshot["corpus"], {{"documents", corpus_hash}}), {corpus_path}, [&] {
               SaveCorpus(Ingest(documents, config.tokenizer, config.min_tokens), corpus_path);
             });
  documents.clear();

  std::optional<SegmentedCorpus> corpus;
  auto need_corpus = [&]() -> const SegmentedCorpus& {
    if (!corpus) corpus = LoadCorpus(corpus_path);
    return *corpus;
  };

  const auto set_names = SetNames(config);
  const auto test_names = TestSetNames(config);
  std::vector<fs::path> perm_dirs;
  ordered_json input_hashes;
  input_hashes["manifest"] = Sha256File(config.manifest);
  input_hashes["documents"] = corpus_hash;

  for (std::size_t k = 0; k < config.permutation_seeds.size(); ++k) {
    const std::uint64_t seed = config.permutation_seeds[k];
    const fs::path dir = out / ("perm-" + std::to_string(k));
    perm_dirs.push_back(dir);
    const std::string tag = std::to_string(k);

    std::vector<fs::path> dataset_paths;
    for (const auto& name : set_names) dataset_paths.push_back(dir / (name + ".jsonl"));
    std::vector<fs::path> pairgen_outputs = dataset_paths;
    pairgen_outputs.push_back(dir / "split.json");
    ordered_json pg_cfg = snapshot["pairgen"];
    pg_cfg["seed"] = seed;
    pg_cfg.erase("seeds");
    runner.Run("pairgen-" + tag, StageKey(pg_cfg, {{"corpus", Sha256File(corpus_path)}}), pairgen_outputs, [&] {
      PairgenPlan plan = config.pairgen;
      plan.seed = seed;
      const PairgenOutput result = RunPairgen(need_corpus(), plan);
      for (const auto& w : result.split.warnings) Log(LogLevel::kWarning, w);
      for (const auto& d : result.datasets) WriteDataset(d, dir / (d.header.set_name + ".jsonl"));
      WriteSplit(result.split, result.groups, dir / "split.json");
    });

    const fs::path train_path = dir / "train.jsonl";
    const fs::path model_path = dir / "features.json";
    runner.Run("features-" + tag, StageKey(snapshot["features"], {{"train", Sha256File(train_path)}}),
               {model_path}, [&] {
                 SaveFeatureModel(BuildFeatureModel(ReadDataset(train_path), config.features), model_path);
               });

    std::map<std::string, std::string> test_hashes;
    for (const auto& name : test_names) test_hashes[name] = Sha256File(dir / (name + ".jsonl"));

    std::vector<fs::path> imp_outputs;
    for (const auto& name : test_names) imp_outputs.push_back(dir / "impostors" / (name + ".results.jsonl"));
    auto imp_inputs = test_hashes;
    imp_inputs["model"] = Sha256File(model_path);
    imp_inputs["pool"] = Sha256File(train_path);
    ordered_json imp_cfg = snapshot["impostors"];
    imp_cfg["seed"] = seed;
    runner.Run("impostors-" + tag, StageKey(imp_cfg, imp_inputs), imp_outputs, [&] {
      const FeatureModel model = LoadFeatureModel(model_path);
      const PairDataset pool = ReadDataset(train_path);
      const ImpostorsVerifier verifier(model, pool, config.impostors);
      for (std::size_t i = 0; i < test_names.size(); ++i) {
        const PairDataset test = ReadDataset(dir / (test_names[i] + ".jsonl"));
        WriteResults(verifier.RunTestset(test, DeriveSeed(seed, "impostors")), imp_outputs[i]);
      }
    });

    if (config.external) {
      std::vector<fs::path> ext_outputs;
      for (const auto& name : test_names) ext_outputs.push_back(dir / "external" / (name + ".results.jsonl"));
      ordered_json ext_cfg = {{"command", config.external->command}, {"url", config.external->url}};
      runner.Run("external-" + tag, StageKey(ext_cfg, test_hashes), ext_outputs, [&] {
        for (std::size_t i = 0; i < test_names.size(); ++i) {
          const PairDataset test = ReadDataset(dir / (test_names[i] + ".jsonl"));
          WriteResults(RunExternal(test, *config.external), ext_outputs[i]);
        }
      });
    }
  }

  // eval over all permutations
  const fs::path report_dir = out / "report";
  std::map<std::string, std::string> eval_inputs;
  for (std::size_t k = 0; k < perm_dirs.size(); ++k) {
    for (const auto& name : test_names) {
      const std::string prefix = "perm-" + std::to_string(k) + "/" + name;
      eval_inputs[prefix] = Sha256File(perm_dirs[k] / (name + ".jsonl"));
      eval_inputs[prefix + "/impostors"] = Sha256File(perm_dirs[k] / "impostors" / (name + ".results.jsonl"));
      if (config.external) {
        eval_inputs[prefix + "/external"] = Sha256File(perm_dirs[k] / "external" / (name + ".results.jsonl"));
      }
    }
  }
  std::vector<fs::path> report_outputs = {report_dir / "prf.csv", report_dir / "by_category.csv",
                                          report_dir / "by_distance.csv", report_dir / "correlations.csv",
                                          report_dir / "summary.txt"};
  if (config.external) report_outputs.push_back(report_dir / "mcnemar.txt");
  runner.Run("eval", StageKey(snapshot["eval"], eval_inputs), report_outputs, [&] {
    std::vector<TestSetResults> sets;
    for (const auto& name : test_names) {
      TestSetResults set{name, {}, {}};
      for (std::size_t k = 0; k < perm_dirs.size(); ++k) {
        const PairDataset dataset = ReadDataset(perm_dirs[k] / (name + ".jsonl"));
        auto a = JoinResults(ReadResults(perm_dirs[k] / "impostors" / (name + ".results.jsonl")), dataset, k);
        set.samples.insert(set.samples.end(), a.begin(), a.end());
        if (config.external) {
          auto b = JoinResults(ReadResults(perm_dirs[k] / "external" / (name + ".results.jsonl")), dataset, k);
          set.samples_b.insert(set.samples_b.end(), b.begin(), b.end());
        }
      }
      sets.push_back(std::move(set));
    }
    WriteReport(BuildReport(sets, config.report), report_dir);
  });

  // Run manifest, copied into every output directory.
  ordered_json manifest;
  manifest["tool"] = "authdrift";
  manifest["version"] = AUTHDRIFT_VERSION;
  manifest["config"] = snapshot;
  manifest["seeds"] = config.permutation_seeds;
  manifest["input_hashes"] = input_hashes;
  manifest["corpus"] = {{"path", "corpus.bin"}, {"sha256", Sha256File(corpus_path)}};
  ordered_json stages = ordered_json::array();
  for (const auto& s : runner.records()) stages.push_back({{"name", s.name}, {"skipped", s.skipped}});
  manifest["stages"] = stages;
  manifest["timestamps"] = {{"started", started}, {"finished", NowUtc()}};
  const std::string text = manifest.dump(2) + "\n";
  WriteFileAtomic(out / "manifest.json", text);
  for (const auto& dir : perm_dirs) WriteFileAtomic(dir / "manifest.json", text);
  WriteFileAtomic(report_dir / "manifest.json", text);

  PipelineSummary summary;
  summary.out_dir = out;
  summary.stages = runner.records();
  summary.report_summary = ReadFile(report_dir / "summary.txt");
  return summary;
}

fs::path WriteDemo(const fs::path& dir, std::uint64_t seed) {
  SynthConfig synth;
  synth.seed = seed;
  const SynthCorpus corpus = GenerateSynthetic(synth);
  WriteSynthetic(corpus, dir / "corpus");

  std::string focus;
  for (const auto& a : corpus.authors) {
    if (a.shifted) {
      focus = a.author_id;
      break;
    }
  }
  ordered_json config;
  config["out_dir"] = "run";
  config["seed"] = seed;
  config["corpus"] = {{"manifest", "corpus/manifest.jsonl"}, {"tokenizer", "unicode_char"}, {"min_tokens", 200}};
  ordered_json quotas;
  quotas["train"] = {{"SAME_DOC", 60}, {"SAME_AUTH_NEAR", 60}, {"SAME_AUTH_FAR", 60},
                     {"DIFF_AUTH_NEAR", 90}, {"DIFF_AUTH_FAR", 90}};
  quotas["dev"] = {{"SAME_DOC", 10}, {"SAME_AUTH_NEAR", 10}, {"SAME_AUTH_FAR", 10},
                   {"DIFF_AUTH_NEAR", 15}, {"DIFF_AUTH_FAR", 15}};
  quotas["test"] = {{"SAME_DOC", 30}, {"SAME_AUTH_NEAR", 30}, {"SAME_AUTH_FAR", 30},
                    {"DIFF_AUTH_NEAR", 45}, {"DIFF_AUTH_FAR", 45}};
  config["pairgen"] = {{"permutations", 3},
                       {"ratios", {{"train", 0.6}, {"dev", 0.1}, {"test", 0.3}}},
                       {"quotas", quotas},
                       {"focus_authors", focus.empty() ? ordered_json::array() : ordered_json::array({focus})}};
  config["features"] = {{"n", 2}, {"max_size", 50000}};
  config["impostors"] = {{"iterations", 100}, {"feature_fraction", 0.9}, {"pool_size", 100},
                         {"impostors_per_iter", 5}, {"threshold", 0.5}};
  config["eval"] = {{"mcnemar", "auto"}, {"bucket_width", 1}};
  const fs::path path = dir / "pipeline.json";
  WriteFileAtomic(path, config.dump(2) + "\n");
  return path;
}

}  // namespace authdrift
