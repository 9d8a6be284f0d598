#pragma once

#include <filesystem>
#include <string>

namespace egopriv {

// Whole-file binary read/write; failures raise ErrorCode::Io.
std::string read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const std::string& bytes);

}  // namespace egopriv
