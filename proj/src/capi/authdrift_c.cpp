#include "authdrift/authdrift.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/corpus.hpp"
#include "core/dataset_io.hpp"
#include "core/error.hpp"
#include "core/eval.hpp"
#include "core/features.hpp"
#include "core/impostors.hpp"
#include "core/pairgen.hpp"
#include "core/pipeline.hpp"
#include "core/protocol.hpp"
#include "core/report.hpp"
#include "core/similarity.hpp"
#include "core/synth.hpp"

struct authdrift_corpus {
  authdrift::SegmentedCorpus value;
};
struct authdrift_dataset {
  authdrift::PairDataset value;
};
struct authdrift_model {
  authdrift::FeatureModel value;
};
struct authdrift_results {
  std::vector<authdrift::VerificationResult> value;
};

namespace {

using authdrift::ErrorKind;
using authdrift::Fail;

thread_local std::string g_last_error;

authdrift_status StatusOf(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return AUTHDRIFT_E_INVALID_ARGUMENT;
    case ErrorKind::kIo: return AUTHDRIFT_E_IO;
    case ErrorKind::kParse: return AUTHDRIFT_E_PARSE;
    case ErrorKind::kConstraint: return AUTHDRIFT_E_CONSTRAINT;
    case ErrorKind::kProtocol: return AUTHDRIFT_E_PROTOCOL;
    case ErrorKind::kTimeout: return AUTHDRIFT_E_TIMEOUT;
    case ErrorKind::kUndefined: return AUTHDRIFT_E_UNDEFINED;
  }
  return AUTHDRIFT_E_INTERNAL;
}

template <typename Fn>
authdrift_status Guard(Fn&& fn) {
  try {
    fn();
    return AUTHDRIFT_OK;
  } catch (const authdrift::Error& e) {
    g_last_error = e.what();
    return StatusOf(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return AUTHDRIFT_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return AUTHDRIFT_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return AUTHDRIFT_E_INTERNAL;
  }
}

void Require(const void* p, const char* what) {
  if (p == nullptr) Fail(ErrorKind::kInvalidArgument, std::string(what) + " must not be NULL");
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void SetOut(char** out, const std::string& s) {
  if (out) *out = CopyString(s);
}

authdrift::McNemarMethod ToMethod(authdrift_mcnemar_method m) {
  switch (m) {
    case AUTHDRIFT_MCNEMAR_AUTO: return authdrift::McNemarMethod::kAuto;
    case AUTHDRIFT_MCNEMAR_CHI2: return authdrift::McNemarMethod::kChiSquare;
    case AUTHDRIFT_MCNEMAR_EXACT: return authdrift::McNemarMethod::kExact;
  }
  Fail(ErrorKind::kInvalidArgument, "unknown McNemar method");
}

authdrift_mcnemar_method FromMethod(authdrift::McNemarMethod m) {
  switch (m) {
    case authdrift::McNemarMethod::kAuto: return AUTHDRIFT_MCNEMAR_AUTO;
    case authdrift::McNemarMethod::kChiSquare: return AUTHDRIFT_MCNEMAR_CHI2;
    case authdrift::McNemarMethod::kExact: return AUTHDRIFT_MCNEMAR_EXACT;
  }
  return AUTHDRIFT_MCNEMAR_AUTO;
}

std::vector<authdrift::EvaluatedSample> Combine(const authdrift::PairDataset& dataset,
                                                const authdrift_results* const* runs, std::size_t n,
                                                bool vote) {
  std::vector<std::vector<authdrift::EvaluatedSample>> joined;
  for (std::size_t k = 0; k < n; ++k) {
    Require(runs[k], "results");
    joined.push_back(authdrift::JoinResults(runs[k]->value, dataset, k));
  }
  return vote ? authdrift::MajorityVote(joined) : authdrift::PoolRuns(joined);
}

}  // namespace

extern "C" {

const char* authdrift_version(void) { return AUTHDRIFT_VERSION; }

const char* authdrift_last_error(void) { return g_last_error.c_str(); }

const char* authdrift_status_name(authdrift_status status) {
  switch (status) {
    case AUTHDRIFT_OK: return "ok";
    case AUTHDRIFT_E_INVALID_ARGUMENT: return "invalid_argument";
    case AUTHDRIFT_E_IO: return "io";
    case AUTHDRIFT_E_PARSE: return "parse";
    case AUTHDRIFT_E_CONSTRAINT: return "constraint";
    case AUTHDRIFT_E_PROTOCOL: return "protocol";
    case AUTHDRIFT_E_TIMEOUT: return "timeout";
    case AUTHDRIFT_E_UNDEFINED: return "undefined";
    case AUTHDRIFT_E_INTERNAL: return "internal";
  }
  return "unknown";
}

void authdrift_set_log_handler(authdrift_log_fn fn, void* user) {
  if (!fn) {
    authdrift::SetLogHandler(nullptr);
    return;
  }
  authdrift::SetLogHandler([fn, user](authdrift::LogLevel level, std::string_view message) {
    const std::string text(message);
    fn(static_cast<authdrift_log_level>(level), text.c_str(), user);
  });
}

void authdrift_string_free(char* s) { std::free(s); }

// ---- corpus ----

authdrift_status authdrift_corpus_ingest(const char* manifest_path, authdrift_token_unit unit, size_t min_tokens,
                                         authdrift_corpus** out) {
  return Guard([&] {
    Require(manifest_path, "manifest_path");
    Require(out, "out");
    if (unit != AUTHDRIFT_TOKENS_UNICODE_CHAR && unit != AUTHDRIFT_TOKENS_WHITESPACE) {
      Fail(ErrorKind::kInvalidArgument, "unknown token unit");
    }
    authdrift::TokenizerConfig tok{static_cast<authdrift::TokenUnit>(unit)};
    auto corpus = std::make_unique<authdrift_corpus>();
    corpus->value = authdrift::Ingest(authdrift::LoadManifest(manifest_path), tok, min_tokens);
    *out = corpus.release();
  });
}

authdrift_status authdrift_corpus_load(const char* path, authdrift_corpus** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    auto corpus = std::make_unique<authdrift_corpus>();
    corpus->value = authdrift::LoadCorpus(path);
    *out = corpus.release();
  });
}

authdrift_status authdrift_corpus_save(const authdrift_corpus* corpus, const char* path) {
  return Guard([&] {
    Require(corpus, "corpus");
    Require(path, "path");
    authdrift::SaveCorpus(corpus->value, path);
  });
}

authdrift_status authdrift_corpus_summarize(const authdrift_corpus* corpus, authdrift_corpus_summary* out) {
  return Guard([&] {
    Require(corpus, "corpus");
    Require(out, "out");
    const auto s = corpus->value.Summarize();
    *out = {s.documents,           s.authors,
            s.paragraphs,          s.admissible_paragraphs,
            s.admissible_documents, s.admissible_authors};
  });
}

void authdrift_corpus_free(authdrift_corpus* corpus) { delete corpus; }

authdrift_status authdrift_synth_write(const char* dir, size_t authors, uint64_t seed, char** manifest_path) {
  return Guard([&] {
    Require(dir, "dir");
    authdrift::SynthConfig config;
    config.authors = authors;
    config.seed = seed;
    const auto path = authdrift::WriteSynthetic(authdrift::GenerateSynthetic(config), dir);
    SetOut(manifest_path, path.string());
  });
}

// ---- pair generation ----

void authdrift_pairgen_options_init(authdrift_pairgen_options* options) {
  if (!options) return;
  const authdrift::PairgenPlan plan;
  *options = {};
  options->seed = plan.seed;
  options->horizon = authdrift::kDefaultHorizon;
  options->include_same_doc = 1;
  options->ratio_train = plan.ratios.train;
  options->ratio_dev = plan.ratios.dev;
  options->ratio_test = plan.ratios.test;
  options->max_combined = plan.truncation.max_combined;
  options->reserve = plan.truncation.reserve;
  options->quotas_json = nullptr;
  options->quota_scale = 1.0;
}

authdrift_status authdrift_pairgen_run(const authdrift_corpus* corpus, const authdrift_pairgen_options* options,
                                       const char* out_path, const char* only_set, char** report) {
  return Guard([&] {
    Require(corpus, "corpus");
    Require(options, "options");
    Require(out_path, "out_path");
    authdrift::PairgenPlan plan;
    plan.seed = options->seed;
    plan.ratios = {options->ratio_train, options->ratio_dev, options->ratio_test};
    plan.truncation.max_combined = options->max_combined;
    plan.truncation.reserve = options->reserve;
    plan.truncation.Validate();
    if (options->quotas_json) {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(options->quotas_json);
      } catch (const nlohmann::json::parse_error& e) {
        Fail(ErrorKind::kParse, std::string("quotas: ") + e.what());
      }
      // Either a complete quota spec or just its "sets" object.
      if (!doc.is_object() || !doc.contains("sets")) {
        doc = {{"horizon", options->horizon},
               {"include_same_doc", options->include_same_doc != 0},
               {"sets", doc}};
      }
      plan.quotas = authdrift::ParseQuotaSpec(doc.dump());
    } else {
      if (!(options->quota_scale > 0.0)) Fail(ErrorKind::kInvalidArgument, "quota_scale must be > 0");
      plan.quotas = authdrift::QuotaSpec::Reference(options->quota_scale);
      plan.quotas.horizon = options->horizon;
      plan.quotas.include_same_doc = options->include_same_doc != 0;
      if (!plan.quotas.include_same_doc) {
        for (auto& [name, counts] : plan.quotas.sets) {
          counts[static_cast<std::size_t>(authdrift::Category::kSameDoc)] = 0;
        }
      }
    }
    for (std::size_t i = 0; i < options->n_focus_authors; ++i) {
      Require(options->focus_authors[i], "focus author");
      plan.focus_authors.emplace_back(options->focus_authors[i]);
    }

    const auto result = authdrift::RunPairgen(corpus->value, plan);
    nlohmann::ordered_json info;
    info["seed"] = plan.seed;
    info["split"] = {{"train", result.split[authdrift::Split::kTrain]},
                     {"dev", result.split[authdrift::Split::kDev]},
                     {"test", result.split[authdrift::Split::kTest]}};
    info["warnings"] = result.split.warnings;
    nlohmann::ordered_json sets = nlohmann::ordered_json::array();
    const std::filesystem::path out(out_path);
    bool found = only_set == nullptr;
    for (const auto& d : result.datasets) {
      if (only_set && d.header.set_name != only_set) continue;
      found = true;
      const auto path = only_set ? out : out / (d.header.set_name + ".jsonl");
      authdrift::WriteDataset(d, path);
      sets.push_back({{"name", d.header.set_name}, {"path", path.string()}, {"samples", d.samples.size()}});
    }
    if (!found) Fail(ErrorKind::kInvalidArgument, std::string("no set named '") + only_set + "' was generated");
    if (!only_set) authdrift::WriteSplit(result.split, result.groups, out / "split.json");
    info["sets"] = sets;
    SetOut(report, info.dump());
  });
}

// ---- datasets and models ----

authdrift_status authdrift_dataset_load(const char* path, authdrift_dataset** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    auto d = std::make_unique<authdrift_dataset>();
    d->value = authdrift::ReadDataset(path);
    *out = d.release();
  });
}

size_t authdrift_dataset_size(const authdrift_dataset* dataset) {
  return dataset ? dataset->value.samples.size() : 0;
}

const char* authdrift_dataset_name(const authdrift_dataset* dataset) {
  return dataset ? dataset->value.header.set_name.c_str() : "";
}

void authdrift_dataset_free(authdrift_dataset* dataset) { delete dataset; }

authdrift_status authdrift_model_build(const authdrift_dataset* train, int n, size_t max_size,
                                       authdrift_model** out) {
  return Guard([&] {
    Require(train, "train");
    Require(out, "out");
    auto m = std::make_unique<authdrift_model>();
    m->value = authdrift::BuildFeatureModel(train->value, authdrift::FeatureConfig{n, max_size});
    *out = m.release();
  });
}

authdrift_status authdrift_model_save(const authdrift_model* model, const char* path) {
  return Guard([&] {
    Require(model, "model");
    Require(path, "path");
    authdrift::SaveFeatureModel(model->value, path);
  });
}

authdrift_status authdrift_model_load(const char* path, authdrift_model** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    auto m = std::make_unique<authdrift_model>();
    m->value = authdrift::LoadFeatureModel(path);
    *out = m.release();
  });
}

size_t authdrift_model_vocab_size(const authdrift_model* model) { return model ? model->value.vocab.size() : 0; }

void authdrift_model_free(authdrift_model* model) { delete model; }

// ---- verification ----

void authdrift_impostor_params_init(authdrift_impostor_params* params) {
  if (!params) return;
  const authdrift::ImpostorParams p;
  *params = {p.iterations, p.feature_fraction, p.pool_size, p.impostors_per_iter, p.threshold};
}

authdrift_status authdrift_impostors_run(const authdrift_model* model, const authdrift_dataset* pool,
                                         const authdrift_dataset* test, const authdrift_impostor_params* params,
                                         uint64_t seed, authdrift_results** out) {
  return Guard([&] {
    Require(model, "model");
    Require(pool, "pool");
    Require(test, "test");
    Require(out, "out");
    authdrift::ImpostorParams p;
    if (params) {
      p = {params->iterations, params->feature_fraction, params->pool_size, params->impostors_per_iter,
           params->threshold};
    }
    const authdrift::ImpostorsVerifier verifier(model->value, pool->value, p);
    auto r = std::make_unique<authdrift_results>();
    r->value = verifier.RunTestset(test->value, seed);
    *out = r.release();
  });
}

void authdrift_endpoint_options_init(authdrift_endpoint_options* options) {
  if (!options) return;
  const authdrift::EndpointOptions e;
  *options = {nullptr, nullptr, e.timeout_seconds, e.window};
}

authdrift_status authdrift_external_run(const authdrift_dataset* test, const authdrift_endpoint_options* options,
                                        authdrift_results** out) {
  return Guard([&] {
    Require(test, "test");
    Require(options, "options");
    Require(out, "out");
    authdrift::EndpointOptions e;
    e.command = options->command ? options->command : "";
    e.url = options->url ? options->url : "";
    e.timeout_seconds = options->timeout_seconds;
    e.window = options->window;
    auto r = std::make_unique<authdrift_results>();
    r->value = authdrift::RunExternal(test->value, e);
    *out = r.release();
  });
}

authdrift_status authdrift_results_load(const char* path, authdrift_results** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    auto r = std::make_unique<authdrift_results>();
    r->value = authdrift::ReadResults(path);
    *out = r.release();
  });
}

authdrift_status authdrift_results_save(const authdrift_results* results, const char* path) {
  return Guard([&] {
    Require(results, "results");
    Require(path, "path");
    authdrift::WriteResults(results->value, path);
  });
}

size_t authdrift_results_size(const authdrift_results* results) { return results ? results->value.size() : 0; }

authdrift_status authdrift_results_get(const authdrift_results* results, size_t index, authdrift_result* out) {
  return Guard([&] {
    Require(results, "results");
    Require(out, "out");
    if (index >= results->value.size()) Fail(ErrorKind::kInvalidArgument, "result index out of range");
    const auto& r = results->value[index];
    *out = {r.sample_id.c_str(), r.truth, r.label, r.score, r.confidence};
  });
}

void authdrift_results_free(authdrift_results* results) { delete results; }

// ---- evaluation ----

void authdrift_eval_options_init(authdrift_eval_options* options) {
  if (!options) return;
  *options = {1, AUTHDRIFT_MCNEMAR_AUTO, 0};
}

authdrift_status authdrift_eval_report(const authdrift_eval_set* sets, size_t n_sets,
                                       const authdrift_eval_options* options, const char* out_dir,
                                       char** summary) {
  return Guard([&] {
    Require(sets, "sets");
    Require(out_dir, "out_dir");
    if (n_sets == 0) Fail(ErrorKind::kInvalidArgument, "no test sets to evaluate");
    authdrift_eval_options opts;
    authdrift_eval_options_init(&opts);
    if (options) opts = *options;
    authdrift::ReportOptions report_options;
    report_options.bucket_width = opts.bucket_width;
    report_options.mcnemar = ToMethod(opts.mcnemar);
    if (report_options.bucket_width < 1) Fail(ErrorKind::kInvalidArgument, "bucket_width must be >= 1");

    std::vector<authdrift::TestSetResults> inputs;
    for (std::size_t i = 0; i < n_sets; ++i) {
      const auto& s = sets[i];
      Require(s.dataset, "dataset");
      if (s.n_runs == 0) Fail(ErrorKind::kInvalidArgument, "test set without results");
      authdrift::TestSetResults t;
      t.name = s.name ? s.name : s.dataset->value.header.set_name;
      t.samples = Combine(s.dataset->value, s.runs, s.n_runs, opts.majority_vote != 0);
      if (s.n_runs_b > 0) t.samples_b = Combine(s.dataset->value, s.runs_b, s.n_runs_b, opts.majority_vote != 0);
      inputs.push_back(std::move(t));
    }
    authdrift::WriteReport(authdrift::BuildReport(inputs, report_options), out_dir);
    if (summary) *summary = CopyString(authdrift::ReadFile(std::filesystem::path(out_dir) / "summary.txt"));
  });
}

// ---- statistics ----

authdrift_status authdrift_minmax_dense(const double* x, const double* y, size_t n, double* out) {
  return Guard([&] {
    Require(out, "out");
    if (n > 0) {
      Require(x, "x");
      Require(y, "y");
    }
    const auto a = authdrift::SparseVector::FromDense({x, n});
    const auto b = authdrift::SparseVector::FromDense({y, n});
    *out = authdrift::MinMaxSimilarity(a, b);
  });
}

authdrift_status authdrift_prf(uint64_t tp, uint64_t fp, uint64_t fn, uint64_t tn, int positive_class,
                               double* precision, double* recall, double* f1) {
  return Guard([&] {
    if (positive_class != 0 && positive_class != 1) Fail(ErrorKind::kInvalidArgument, "positive_class must be 0 or 1");
    const auto prf = authdrift::ComputePrf({tp, fp, fn, tn}, positive_class);
    if (precision) *precision = prf.precision;
    if (recall) *recall = prf.recall;
    if (f1) *f1 = prf.f1;
  });
}

authdrift_status authdrift_pearson(const double* xs, const double* ys, size_t n, double* r, double* p) {
  return Guard([&] {
    Require(xs, "xs");
    Require(ys, "ys");
    const auto stat = authdrift::Pearson({xs, n}, {ys, n});
    if (r) *r = stat.r;
    if (p) *p = stat.p;
  });
}

authdrift_status authdrift_mcnemar(uint64_t b, uint64_t c, authdrift_mcnemar_method method, double* statistic,
                                   double* p, authdrift_mcnemar_method* used) {
  return Guard([&] {
    const auto result = authdrift::McNemarFromCounts(b, c, ToMethod(method));
    if (statistic) *statistic = result.statistic;
    if (p) *p = result.p;
    if (used) *used = FromMethod(result.method);
  });
}

// ---- pipeline ----

authdrift_status authdrift_pipeline_run(const char* config_path, const char* overrides_json, char** summary) {
  return Guard([&] {
    Require(config_path, "config_path");
    const auto config = authdrift::LoadPipelineConfig(config_path, overrides_json ? overrides_json : "");
    const auto result = authdrift::RunPipeline(config);
    nlohmann::ordered_json j;
    j["out_dir"] = result.out_dir.string();
    nlohmann::ordered_json stages = nlohmann::ordered_json::array();
    for (const auto& s : result.stages) stages.push_back({{"name", s.name}, {"skipped", s.skipped}});
    j["stages"] = stages;
    j["report"] = result.report_summary;
    SetOut(summary, j.dump());
  });
}

authdrift_status authdrift_demo_write(const char* dir, uint64_t seed, char** config_path) {
  return Guard([&] {
    Require(dir, "dir");
    SetOut(config_path, authdrift::WriteDemo(dir, seed).string());
  });
}

}  // extern "C"
