// Command-line front end over the C interface.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "authdrift/authdrift.h"

namespace {

struct CliError {
  authdrift_status status;
};

void Check(authdrift_status status) {
  if (status != AUTHDRIFT_OK) throw CliError{status};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using Corpus = std::unique_ptr<authdrift_corpus, Deleter<authdrift_corpus, authdrift_corpus_free>>;
using Dataset = std::unique_ptr<authdrift_dataset, Deleter<authdrift_dataset, authdrift_dataset_free>>;
using Model = std::unique_ptr<authdrift_model, Deleter<authdrift_model, authdrift_model_free>>;
using Results = std::unique_ptr<authdrift_results, Deleter<authdrift_results, authdrift_results_free>>;
using CString = std::unique_ptr<char, Deleter<char, authdrift_string_free>>;

Dataset LoadDataset(const std::string& path) {
  authdrift_dataset* d = nullptr;
  Check(authdrift_dataset_load(path.c_str(), &d));
  return Dataset(d);
}

Results LoadResults(const std::string& path) {
  authdrift_results* r = nullptr;
  Check(authdrift_results_load(path.c_str(), &r));
  return Results(r);
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "error: cannot read %s\n", path.c_str());
    std::exit(1);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void LogToStderr(authdrift_log_level level, const char* message, void* user) {
  const bool verbose = *static_cast<bool*>(user);
  if (level == AUTHDRIFT_LOG_WARNING) {
    std::fprintf(stderr, "warning: %s\n", message);
  } else if (verbose) {
    std::fprintf(stderr, "%s\n", message);
  }
}

void PrintStages(const std::string& summary_json) {
  const auto j = nlohmann::json::parse(summary_json);
  for (const auto& s : j["stages"]) {
    std::printf("%-14s %s\n", s["name"].get<std::string>().c_str(), s["skipped"].get<bool>() ? "skipped" : "ran");
  }
  std::printf("\nreport: %s/report\n\n%s", j["out_dir"].get<std::string>().c_str(),
              j["report"].get<std::string>().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporally stratified authorship verification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(authdrift_version()));
  bool verbose = false;
  int threads = 0;
  app.add_flag("-v,--verbose", verbose, "Log stage progress to stderr");
  app.add_option("--threads", threads, "Worker threads (also AUTHDRIFT_THREADS)")->check(CLI::PositiveNumber);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Segment a manifest's documents into paragraphs");
  std::string manifest, corpus_out, tokenizer = "unicode_char";
  std::size_t min_tokens = 200;
  ingest->add_option("--manifest", manifest, "JSON-lines document manifest")->required();
  ingest->add_option("--out", corpus_out, "Segmented corpus file")->required();
  ingest->add_option("--tokenizer", tokenizer, "Token unit")
      ->check(CLI::IsMember({"unicode_char", "whitespace"}));
  ingest->add_option("--min-tokens", min_tokens, "Minimum tokens for an admissible paragraph");

  // pairgen
  auto* pairgen = app.add_subcommand("pairgen", "Generate paragraph-pair datasets");
  authdrift_pairgen_options pg;
  authdrift_pairgen_options_init(&pg);
  std::string pg_corpus, pg_out, pg_quotas, pg_split;
  std::vector<double> ratios;
  std::vector<std::string> focus;
  bool no_same_doc = false;
  pairgen->add_option("--corpus", pg_corpus, "Segmented corpus file")->required();
  pairgen->add_option("--out", pg_out,
                      "Output directory, or a .jsonl file when a single set is written")
      ->required();
  pairgen->add_option("--split", pg_split, "Write only this set (train, dev, test, focus-<author>)");
  pairgen->add_option("--quotas", pg_quotas, "Quota JSON file");
  pairgen->add_option("--quota-scale", pg.quota_scale, "Scale for the reference quotas");
  pairgen->add_option("--seed", pg.seed, "Master seed");
  pairgen->add_option("--horizon", pg.horizon, "NEAR/FAR horizon in years");
  pairgen->add_option("--ratios", ratios, "train,dev,test author ratios")->expected(3)->delimiter(',');
  pairgen->add_option("--max-combined", pg.max_combined, "Combined token budget of a pair");
  pairgen->add_option("--reserve", pg.reserve, "Tokens reserved for special markers");
  pairgen->add_option("--focus-author", focus, "Author evaluated in a dedicated set (repeatable)");
  pairgen->add_flag("--no-same-doc", no_same_doc, "Drop the SAME_DOC category");

  // features build
  auto* features = app.add_subcommand("features", "Character n-gram tf-idf models");
  features->require_subcommand(1);
  auto* features_build = features->add_subcommand("build", "Fit vocabulary and idf on a training set");
  std::string fb_train, fb_out;
  int fb_n = 2;
  std::size_t fb_size = 50000;
  features_build->add_option("--train", fb_train, "Training dataset")->required();
  features_build->add_option("--n", fb_n, "n-gram order");
  features_build->add_option("--size", fb_size, "Maximum vocabulary size");
  features_build->add_option("--out", fb_out, "Model file")->required();

  // impostors run
  auto* impostors = app.add_subcommand("impostors", "Impostors verification");
  impostors->require_subcommand(1);
  auto* impostors_run = impostors->add_subcommand("run", "Verify every sample of a test set");
  authdrift_impostor_params ip;
  authdrift_impostor_params_init(&ip);
  std::string ir_test, ir_model, ir_pool, ir_out;
  std::uint64_t ir_seed = 17;
  impostors_run->add_option("--test", ir_test, "Test dataset")->required();
  impostors_run->add_option("--model", ir_model, "Feature model")->required();
  impostors_run->add_option("--pool", ir_pool, "Dataset supplying impostor candidates")->required();
  impostors_run->add_option("--iterations", ip.iterations, "Rounds per sample");
  impostors_run->add_option("--feature-fraction", ip.feature_fraction, "Share of features per round");
  impostors_run->add_option("--pool-size", ip.pool_size, "Impostors drawn per sample");
  impostors_run->add_option("--per-iter", ip.impostors_per_iter, "Impostors compared per round");
  impostors_run->add_option("--threshold", ip.threshold, "Decision threshold on the score");
  impostors_run->add_option("--seed", ir_seed, "Seed");
  impostors_run->add_option("--out", ir_out, "Results file")->required();

  // external
  auto* external = app.add_subcommand("external", "Query an external verifier over the verify/1 protocol");
  authdrift_endpoint_options ep;
  authdrift_endpoint_options_init(&ep);
  std::string ex_test, ex_command, ex_url, ex_out;
  external->add_option("--test", ex_test, "Test dataset")->required();
  auto* cmd_opt = external->add_option("--command", ex_command, "Endpoint command (run with /bin/sh -c)");
  auto* url_opt = external->add_option("--url", ex_url, "Endpoint base URL");
  cmd_opt->excludes(url_opt);
  external->add_option("--timeout", ep.timeout_seconds, "Seconds without progress before giving up");
  external->add_option("--window", ep.window, "Maximum in-flight requests");
  external->add_option("--out", ex_out, "Results file")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluation report");
  std::vector<std::string> ev_results, ev_results_b;
  std::string ev_dataset, ev_out, ev_name, ev_mcnemar = "auto";
  authdrift_eval_options eo;
  authdrift_eval_options_init(&eo);
  bool majority = false;
  eval->add_option("--results", ev_results, "Results of one run (repeat to pool runs)")->required();
  eval->add_option("--results-b", ev_results_b, "Results of a second classifier (repeatable)");
  eval->add_option("--dataset", ev_dataset, "Dataset the results answer")->required();
  eval->add_option("--name", ev_name, "Test set name in the report");
  eval->add_option("--out", ev_out, "Report directory")->required();
  eval->add_option("--bucket-width", eo.bucket_width, "Year-distance bucket width")->check(CLI::PositiveNumber);
  eval->add_option("--mcnemar", ev_mcnemar, "McNemar p-value branch")
      ->check(CLI::IsMember({"auto", "chi2", "exact"}));
  eval->add_flag("--majority-vote", majority, "Vote across runs instead of pooling");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage from a config file");
  std::string pl_config, pl_out, pl_override;
  std::uint64_t pl_seed = 0;
  pipeline->add_option("config", pl_config, "Pipeline config (JSON)")->required();
  pipeline->add_option("--out", pl_out, "Output directory (overrides out_dir)");
  auto* pl_seed_opt = pipeline->add_option("--seed", pl_seed, "Master seed (replaces explicit permutation seeds)");
  pipeline->add_option("--override", pl_override, "JSON merge patch applied to the config");

  // demo
  auto* demo = app.add_subcommand("demo", "Synthetic corpus end to end");
  std::string demo_out = "authdrift-demo";
  std::uint64_t demo_seed = 17;
  demo->add_option("--out", demo_out, "Working directory");
  demo->add_option("--seed", demo_seed, "Seed for corpus and pipeline");

  CLI11_PARSE(app, argc, argv);

  if (threads > 0) setenv("AUTHDRIFT_THREADS", std::to_string(threads).c_str(), 1);
  authdrift_set_log_handler(LogToStderr, &verbose);

  try {
    if (*ingest) {
      authdrift_corpus* c = nullptr;
      const auto unit = tokenizer == "whitespace" ? AUTHDRIFT_TOKENS_WHITESPACE : AUTHDRIFT_TOKENS_UNICODE_CHAR;
      Check(authdrift_corpus_ingest(manifest.c_str(), unit, min_tokens, &c));
      Corpus corpus(c);
      Check(authdrift_corpus_save(corpus.get(), corpus_out.c_str()));
      authdrift_corpus_summary s;
      Check(authdrift_corpus_summarize(corpus.get(), &s));
      std::printf("documents %zu (admissible %zu)\nauthors %zu (admissible %zu)\nparagraphs %zu (admissible %zu)\n",
                  s.documents, s.admissible_documents, s.authors, s.admissible_authors, s.paragraphs,
                  s.admissible_paragraphs);
    } else if (*pairgen) {
      authdrift_corpus* c = nullptr;
      Check(authdrift_corpus_load(pg_corpus.c_str(), &c));
      Corpus corpus(c);
      std::string quotas_text;
      if (!pg_quotas.empty()) {
        quotas_text = Slurp(pg_quotas);
        pg.quotas_json = quotas_text.c_str();
      }
      if (!ratios.empty()) {
        pg.ratio_train = ratios[0];
        pg.ratio_dev = ratios[1];
        pg.ratio_test = ratios[2];
      }
      if (no_same_doc) pg.include_same_doc = 0;
      std::vector<const char*> focus_ptrs;
      for (const auto& f : focus) focus_ptrs.push_back(f.c_str());
      pg.focus_authors = focus_ptrs.data();
      pg.n_focus_authors = focus_ptrs.size();
      // A .jsonl target without --split names the set by its file stem.
      const std::filesystem::path out(pg_out);
      if (pg_split.empty() && out.extension() == ".jsonl") pg_split = out.stem().string();
      char* report = nullptr;
      Check(authdrift_pairgen_run(corpus.get(), &pg, pg_out.c_str(), pg_split.empty() ? nullptr : pg_split.c_str(),
                                  &report));
      CString owned(report);
      const auto j = nlohmann::json::parse(report);
      for (const auto& s : j["sets"]) {
        std::printf("%-24s %6zu samples  %s\n", s["name"].get<std::string>().c_str(), s["samples"].get<std::size_t>(),
                    s["path"].get<std::string>().c_str());
      }
      for (const auto& w : j["warnings"]) std::fprintf(stderr, "warning: %s\n", w.get<std::string>().c_str());
    } else if (*features_build) {
      auto train = LoadDataset(fb_train);
      authdrift_model* m = nullptr;
      Check(authdrift_model_build(train.get(), fb_n, fb_size, &m));
      Model model(m);
      Check(authdrift_model_save(model.get(), fb_out.c_str()));
      std::printf("vocabulary %zu n-grams -> %s\n", authdrift_model_vocab_size(model.get()), fb_out.c_str());
    } else if (*impostors_run) {
      authdrift_model* m = nullptr;
      Check(authdrift_model_load(ir_model.c_str(), &m));
      Model model(m);
      auto pool = LoadDataset(ir_pool);
      auto test = LoadDataset(ir_test);
      authdrift_results* r = nullptr;
      Check(authdrift_impostors_run(model.get(), pool.get(), test.get(), &ip, ir_seed, &r));
      Results results(r);
      Check(authdrift_results_save(results.get(), ir_out.c_str()));
      std::printf("%zu results -> %s\n", authdrift_results_size(results.get()), ir_out.c_str());
    } else if (*external) {
      if (ex_command.empty() == ex_url.empty()) {
        std::fprintf(stderr, "error: give exactly one of --command or --url\n");
        return 2;
      }
      ep.command = ex_command.empty() ? nullptr : ex_command.c_str();
      ep.url = ex_url.empty() ? nullptr : ex_url.c_str();
      auto test = LoadDataset(ex_test);
      authdrift_results* r = nullptr;
      Check(authdrift_external_run(test.get(), &ep, &r));
      Results results(r);
      Check(authdrift_results_save(results.get(), ex_out.c_str()));
      std::printf("%zu results -> %s\n", authdrift_results_size(results.get()), ex_out.c_str());
    } else if (*eval) {
      auto dataset = LoadDataset(ev_dataset);
      std::vector<Results> a, b;
      std::vector<const authdrift_results*> pa, pb;
      for (const auto& p : ev_results) {
        a.push_back(LoadResults(p));
        pa.push_back(a.back().get());
      }
      for (const auto& p : ev_results_b) {
        b.push_back(LoadResults(p));
        pb.push_back(b.back().get());
      }
      eo.mcnemar = ev_mcnemar == "chi2"    ? AUTHDRIFT_MCNEMAR_CHI2
                   : ev_mcnemar == "exact" ? AUTHDRIFT_MCNEMAR_EXACT
                                           : AUTHDRIFT_MCNEMAR_AUTO;
      eo.majority_vote = majority ? 1 : 0;
      authdrift_eval_set set{ev_name.empty() ? nullptr : ev_name.c_str(), dataset.get(), pa.data(), pa.size(),
                             pb.data(), pb.size()};
      char* summary = nullptr;
      Check(authdrift_eval_report(&set, 1, &eo, ev_out.c_str(), &summary));
      CString owned(summary);
      std::printf("%s", summary);
    } else if (*pipeline) {
      nlohmann::json patch = nlohmann::json::object();
      if (!pl_override.empty()) {
        try {
          patch = nlohmann::json::parse(pl_override);
        } catch (const nlohmann::json::parse_error& e) {
          std::fprintf(stderr, "error: --override: %s\n", e.what());
          return 2;
        }
      }
      if (!pl_out.empty()) patch["out_dir"] = std::filesystem::absolute(pl_out).string();
      if (*pl_seed_opt) {
        patch["seed"] = pl_seed;
        patch["pairgen"]["seeds"] = nullptr;
      }
      const std::string patch_text = patch.dump();
      char* summary = nullptr;
      Check(authdrift_pipeline_run(pl_config.c_str(), patch_text.c_str(), &summary));
      CString owned(summary);
      PrintStages(summary);
    } else if (*demo) {
      char* config = nullptr;
      Check(authdrift_demo_write(demo_out.c_str(), demo_seed, &config));
      CString owned_config(config);
      std::printf("synthetic corpus and config written: %s\n", config);
      char* summary = nullptr;
      Check(authdrift_pipeline_run(config, nullptr, &summary));
      CString owned(summary);
      PrintStages(summary);
    }
  } catch (const CliError& e) {
    std::fprintf(stderr, "error (%s): %s\n", authdrift_status_name(e.status), authdrift_last_error());
    return 1;
  }
  return 0;
}
