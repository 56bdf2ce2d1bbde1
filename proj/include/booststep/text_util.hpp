#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace booststep {

std::string trim(std::string_view s);
std::string trim_right(std::string_view s);

// Splits on every occurrence of `delimiter`; empty fragments are kept.
std::vector<std::string> split(std::string_view s, std::string_view delimiter);

std::string join(const std::vector<std::string>& parts, std::string_view separator);

bool starts_with_icase(std::string_view s, std::string_view prefix);

// Reads a whole file; throws std::runtime_error if it cannot be opened.
std::string read_file(const std::string& path);

// Writes via a temporary sibling and rename, so readers never see a partial file.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace booststep
