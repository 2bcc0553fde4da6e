#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "core/pairgen.hpp"
#include "core/results.hpp"

namespace authdrift {

inline constexpr const char* kDatasetFormat = "authdrift-pairs/1";

// First line: {"header": {...}}; then one sample object per line.
void WriteDataset(const PairDataset& dataset, const std::filesystem::path& path);
PairDataset ReadDataset(const std::filesystem::path& path);

// {"sample_id", "truth", "label", "score", "confidence"} per line.
void WriteResults(const std::vector<VerificationResult>& results, const std::filesystem::path& path);
std::vector<VerificationResult> ReadResults(const std::filesystem::path& path);

void WriteSplit(const AuthorSplit& split, const AuthorGroups& groups,
                const std::filesystem::path& path);

std::string ReadFile(const std::filesystem::path& path);
// Writes via a temporary sibling and rename.
void WriteFileAtomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace authdrift
