#pragma once

#include <string>
#include <string_view>

namespace ttr {

// Whole-file read; throws InputError when the file cannot be opened.
std::string read_file(const std::string& path);

// Whole-file overwrite; throws InputError when the file cannot be written.
void write_file(const std::string& path, std::string_view content);

}  // namespace ttr
