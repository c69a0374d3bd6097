#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace vpr {

std::string trim(std::string_view s);

// Trims and squeezes every internal whitespace run to a single space.
std::string collapse_whitespace(std::string_view s);

std::vector<std::string> split_words(std::string_view s);

std::size_t word_count(std::string_view s);

// Keeps the first max_words whitespace-delimited words; sets *truncated when
// anything was cut.
std::string truncate_words(std::string_view s, std::size_t max_words,
                           bool* truncated = nullptr);

std::string to_lower(std::string_view s);

}  // namespace vpr
