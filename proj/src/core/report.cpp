#include "core/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "core/dataset_io.hpp"
#include "core/error.hpp"

namespace authdrift {
namespace {

std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string CsvLine(std::initializer_list<std::string> fields) {
  std::string line;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) line += ',';
    line += CsvField(f);
    first = false;
  }
  line += '\n';
  return line;
}

std::string U(std::uint64_t v) { return std::to_string(v); }

void AppendSet(EvalReport& report, const std::string& name,
               const std::vector<EvaluatedSample>& samples,
               const std::vector<EvaluatedSample>& samples_b, const ReportOptions& options) {
  const auto results = ResultsOf(samples);
  const ConfusionMatrix cm = Tally(results);
  for (int cls : {1, 0}) report.prf.push_back({name, cls, cm, ComputePrf(cm, cls)});
  for (const auto& stat : ByCategory(samples)) report.categories.push_back({name, stat});

  for (Polarity pol : {Polarity::kSameAuthor, Polarity::kDifferentAuthor}) {
    const auto buckets = ByDistance(samples, pol, options.bucket_width);
    std::vector<double> delta;
    std::vector<double> accuracy;
    std::vector<double> confidence;
    for (const auto& b : buckets) {
      report.distances.push_back({name, pol, b});
      delta.push_back(b.delta);
      accuracy.push_back(b.accuracy);
      confidence.push_back(b.mean_confidence);
    }
    auto correlate = [&](const char* measure, const std::vector<double>& xs) {
      CorrelationRow row{name, pol, measure, std::nullopt, xs.size()};
      try {
        row.stat = Pearson(xs, accuracy);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kUndefined) throw;
      }
      report.correlations.push_back(std::move(row));
    };
    correlate("r1_distance_accuracy", delta);
    correlate("r2_confidence_accuracy", confidence);
  }
  if (!samples_b.empty()) report.mcnemar.push_back({name, McNemar(samples, samples_b, options.mcnemar)});
}

}  // namespace

std::string FormatNumber(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) Fail(ErrorKind::kInvalidArgument, "cannot format number");
  return std::string(buf, ptr);
}

EvalReport BuildReport(const std::vector<TestSetResults>& sets, const ReportOptions& options) {
  EvalReport report;
  std::vector<EvaluatedSample> all;
  std::vector<EvaluatedSample> all_b;
  bool compare = !sets.empty();
  for (const auto& set : sets) {
    if (set.samples_b.empty()) compare = false;
  }
  std::size_t run_offset = 0;
  for (const auto& set : sets) {
    AppendSet(report, set.name, set.samples, set.samples_b, options);
    // Keep (run, sample_id) keys unique across sets in the pooled block.
    std::size_t max_run = 0;
    for (auto s : set.samples) {
      max_run = std::max(max_run, s.run);
      s.run += run_offset;
      all.push_back(std::move(s));
    }
    if (compare) {
      for (auto s : set.samples_b) {
        max_run = std::max(max_run, s.run);
        s.run += run_offset;
        all_b.push_back(std::move(s));
      }
    }
    run_offset += max_run + 1;
  }
  AppendSet(report, kOverallName, all, compare ? all_b : std::vector<EvaluatedSample>{}, options);
  return report;
}

void WriteReport(const EvalReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  std::string prf = CsvLine({"test_set", "class", "precision", "recall", "f1", "tp", "fp", "fn", "tn"});
  for (const auto& r : report.prf) {
    prf += CsvLine({r.test_set, std::to_string(r.cls), FormatNumber(r.prf.precision),
                    FormatNumber(r.prf.recall), FormatNumber(r.prf.f1), U(r.cm.tp), U(r.cm.fp),
                    U(r.cm.fn), U(r.cm.tn)});
  }
  WriteFileAtomic(dir / "prf.csv", prf);

  std::string cat = CsvLine({"test_set", "category", "n", "accuracy", "mean_confidence"});
  for (const auto& r : report.categories) {
    cat += CsvLine({r.test_set, std::string(ToString(r.stat.category)), U(r.stat.n),
                    FormatNumber(r.stat.accuracy), FormatNumber(r.stat.mean_confidence)});
  }
  WriteFileAtomic(dir / "by_category.csv", cat);

  std::string dist = CsvLine({"test_set", "polarity", "delta_years", "n", "accuracy", "mean_confidence"});
  for (const auto& r : report.distances) {
    dist += CsvLine({r.test_set, std::string(ToString(r.polarity)), std::to_string(r.bucket.delta),
                     U(r.bucket.n), FormatNumber(r.bucket.accuracy),
                     FormatNumber(r.bucket.mean_confidence)});
  }
  WriteFileAtomic(dir / "by_distance.csv", dist);

  std::string corr = CsvLine({"test_set", "polarity", "measure", "r", "p", "points"});
  for (const auto& r : report.correlations) {
    corr += CsvLine({r.test_set, std::string(ToString(r.polarity)), r.measure,
                     r.stat ? FormatNumber(r.stat->r) : "NA", r.stat ? FormatNumber(r.stat->p) : "NA",
                     U(r.points)});
  }
  WriteFileAtomic(dir / "correlations.csv", corr);

  if (!report.mcnemar.empty()) {
    std::string mc;
    for (const auto& r : report.mcnemar) {
      mc += "test_set=" + r.test_set + " b=" + U(r.result.b) + " c=" + U(r.result.c) +
            " statistic=" + FormatNumber(r.result.statistic) + " p=" + FormatNumber(r.result.p) +
            " method=" + std::string(ToString(r.result.method)) + "\n";
    }
    WriteFileAtomic(dir / "mcnemar.txt", mc);
  }

  std::ostringstream summary;
  summary << "Per-class precision / recall / F1\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-24s %5s %8s %8s %8s %8s\n", "test set", "class", "prec",
                "rec", "f1", "n");
  summary << line;
  for (const auto& r : report.prf) {
    std::snprintf(line, sizeof(line), "%-24s %5d %8.3f %8.3f %8.3f %8llu\n", r.test_set.c_str(),
                  r.cls, r.prf.precision, r.prf.recall, r.prf.f1,
                  static_cast<unsigned long long>(r.cm.total()));
    summary << line;
  }
  summary << "\nAccuracy / mean confidence by category\n";
  for (const auto& r : report.categories) {
    std::snprintf(line, sizeof(line), "%-24s %-15s n=%-6zu acc=%.3f conf=%.3f\n",
                  r.test_set.c_str(), std::string(ToString(r.stat.category)).c_str(), r.stat.n,
                  r.stat.accuracy, r.stat.mean_confidence);
    summary << line;
  }
  summary << "\nCorrelations over year-distance buckets\n";
  for (const auto& r : report.correlations) {
    if (r.stat) {
      std::snprintf(line, sizeof(line), "%-24s %-16s %-24s r=%+.3f p=%.4g\n", r.test_set.c_str(),
                    std::string(ToString(r.polarity)).c_str(), r.measure.c_str(), r.stat->r,
                    r.stat->p);
    } else {
      std::snprintf(line, sizeof(line), "%-24s %-16s %-24s undefined (%zu buckets)\n",
                    r.test_set.c_str(), std::string(ToString(r.polarity)).c_str(),
                    r.measure.c_str(), r.points);
    }
    summary << line;
  }
  for (const auto& r : report.mcnemar) {
    std::snprintf(line, sizeof(line), "\nMcNemar %s: b=%llu c=%llu chi2=%.4f p=%.4g (%s)\n",
                  r.test_set.c_str(), static_cast<unsigned long long>(r.result.b),
                  static_cast<unsigned long long>(r.result.c), r.result.statistic, r.result.p,
                  std::string(ToString(r.result.method)).c_str());
    summary << line;
  }
  WriteFileAtomic(dir / "summary.txt", summary.str());
}

std::vector<std::vector<std::string>> ReadCsv(const std::filesystem::path& path) {
  const std::string text = ReadFile(path);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
    } else {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace authdrift
