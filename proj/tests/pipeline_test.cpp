#include "core/pipeline.hpp"

#include <gtest/gtest.h>

#include "core/error.hpp"
#include "test_support.hpp"

namespace authdrift {
namespace {

namespace fs = std::filesystem;

constexpr const char* kQuick = R"({"pairgen": {"permutations": 2}, "impostors": {"iterations": 30}})";

std::string ConfigError(const std::string& text, std::string_view overrides = {}) {
  try {
    ParsePipelineConfig(text, "exp.json", overrides);
  } catch (const Error& e) {
    return e.what();
  }
  ADD_FAILURE() << "config accepted";
  return "";
}

TEST(PipelineConfigTest, Defaults) {
  const auto c = ParsePipelineConfig(R"({"corpus": {"manifest": "m.jsonl"}})", "dir/exp.json");
  EXPECT_EQ(c.manifest, fs::path("dir/m.jsonl"));
  EXPECT_EQ(c.out_dir, fs::path("dir/run"));
  EXPECT_EQ(c.permutation_seeds, (std::vector<std::uint64_t>{17, 18, 19}));
  EXPECT_EQ(c.impostors.iterations, 100);
  EXPECT_EQ(c.pairgen.truncation.PerSideBudget(), 254);
  EXPECT_FALSE(c.external.has_value());
}

TEST(PipelineConfigTest, ErrorsCarryLineAndPointer) {
  const std::string text =
      "{\n"
      "  \"corpus\": {\"manifest\": \"m.jsonl\"},\n"
      "  \"impostors\": {\n"
      "    \"iterations\": \"many\"\n"
      "  }\n"
      "}\n";
  const auto msg = ConfigError(text);
  EXPECT_NE(msg.find("exp.json:4: /impostors/iterations"), std::string::npos) << msg;

  const auto unknown = ConfigError("{\n\"corpus\": {\"manifest\": \"m\"},\n\"colour\": 1}");
  EXPECT_NE(unknown.find("exp.json:3: /colour: unknown key"), std::string::npos) << unknown;

  const auto missing = ConfigError("{\"corpus\": {}}");
  EXPECT_NE(missing.find("/corpus/manifest"), std::string::npos) << missing;

  const auto malformed = ConfigError("{\n\"corpus\": {\n}},\n");
  EXPECT_NE(malformed.find("exp.json:3"), std::string::npos) << malformed;

  const auto ratios = ConfigError(R"({"corpus": {"manifest": "m"}, "pairgen": {"ratios": {"train": -1}}})");
  EXPECT_NE(ratios.find("/pairgen/ratios"), std::string::npos) << ratios;
}

TEST(PipelineConfigTest, OverridesApplyBeforeValidation) {
  const auto c = ParsePipelineConfig(R"({"corpus": {"manifest": "m.jsonl"}, "seed": 3})", "exp.json",
                                     R"({"seed": 40, "impostors": {"pool_size": 50}})");
  EXPECT_EQ(c.permutation_seeds.front(), 40u);
  EXPECT_EQ(c.impostors.pool_size, 50);
  EXPECT_NE(ConfigError(R"({"corpus": {"manifest": "m"}})", R"({"impostors": {"pool_size": 2}})")
                .find("/impostors"),
            std::string::npos);
}

TEST(PipelineTest, MissingManifestIsNamed) {
  testing::TempDir dir;
  testing::WriteText(dir / "exp.json", R"({"corpus": {"manifest": "nowhere/m.jsonl"}})");
  try {
    RunPipeline(LoadPipelineConfig(dir / "exp.json"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("nowhere/m.jsonl"), std::string::npos) << e.what();
  }
}

TEST(PipelineTest, RerunSkipsAndChangesRerunDownstream) {
  testing::TempDir dir;
  const auto config_path = WriteDemo(dir.path(), 5);
  const auto first = RunPipeline(LoadPipelineConfig(config_path, kQuick));
  ASSERT_EQ(first.stages.size(), 8u);
  for (const auto& s : first.stages) EXPECT_FALSE(s.skipped) << s.name;
  EXPECT_TRUE(fs::exists(first.out_dir / "report" / "prf.csv"));
  EXPECT_TRUE(fs::exists(first.out_dir / "perm-1" / "manifest.json"));
  EXPECT_TRUE(fs::exists(first.out_dir / "report" / "manifest.json"));

  const auto second = RunPipeline(LoadPipelineConfig(config_path, kQuick));
  for (const auto& s : second.stages) EXPECT_TRUE(s.skipped) << s.name;
  EXPECT_EQ(second.report_summary, first.report_summary);

  const auto changed = RunPipeline(
      LoadPipelineConfig(config_path, R"({"pairgen": {"permutations": 2}, "impostors": {"iterations": 31}})"));
  for (const auto& s : changed.stages) {
    const bool downstream = s.name.starts_with("impostors") || s.name == "eval";
    EXPECT_EQ(s.skipped, !downstream) << s.name;
  }

  // A tampered output invalidates its stage.
  testing::WriteText(changed.out_dir / "perm-0" / "features.json", "{}");
  const auto repaired = RunPipeline(
      LoadPipelineConfig(config_path, R"({"pairgen": {"permutations": 2}, "impostors": {"iterations": 31}})"));
  for (const auto& s : repaired.stages) {
    if (s.name == "features-0") EXPECT_FALSE(s.skipped);
    if (s.name == "pairgen-0") EXPECT_TRUE(s.skipped);
  }
}

TEST(PipelineTest, ByteIdenticalAcrossRuns) {
  testing::TempDir dir;
  const auto config_path = WriteDemo(dir.path(), 9);
  const auto config = LoadPipelineConfig(config_path, kQuick);
  RunPipeline(config);
  const auto before = testing::TreeContents(config.out_dir);
  fs::remove_all(config.out_dir);
  RunPipeline(config);
  const auto after = testing::TreeContents(config.out_dir);
  ASSERT_EQ(before.size(), after.size());
  for (const auto& [name, text] : before) {
    ASSERT_TRUE(after.count(name)) << name;
    EXPECT_TRUE(after.at(name) == text) << name;
  }
}

TEST(PipelineTest, ExternalStageAndMcNemar) {
  testing::TempDir dir;
  const auto config_path = WriteDemo(dir.path(), 5);
  const std::string overrides =
      R"({"pairgen": {"permutations": 1}, "impostors": {"iterations": 20}, "external": {"command": ")" +
      testing::StubCommand("echo") + R"(", "timeout": 30}})";
  const auto summary = RunPipeline(LoadPipelineConfig(config_path, overrides));
  EXPECT_TRUE(fs::exists(summary.out_dir / "perm-0" / "external" / "test.results.jsonl"));
  EXPECT_TRUE(fs::exists(summary.out_dir / "report" / "mcnemar.txt"));
}

TEST(PipelineTest, StageFailureIsNamed) {
  testing::TempDir dir;
  const auto config_path = WriteDemo(dir.path(), 5);
  try {
    RunPipeline(LoadPipelineConfig(config_path, R"({"pairgen": {"permutations": 1}, "impostors": {"pool_size": 100000}})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("stage 'impostors-0' failed"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace authdrift
