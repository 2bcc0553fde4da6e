#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace authdrift {

// Lower-case hex SHA-256 digests.
std::string Sha256Hex(std::string_view data);
std::string Sha256File(const std::filesystem::path& path);

}  // namespace authdrift
