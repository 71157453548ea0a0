#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace taaco {

// Trim leading/trailing whitespace and collapse internal runs to one space.
// Casing is preserved; this is the display form of a phrase.
std::string display_normalize(const std::string& text);

// Lowercased display form. All component/concept comparisons, cache keys and
// embedding-table keys use this.
std::string match_key(const std::string& text);

std::string to_lower(const std::string& text);

std::vector<std::string> split(const std::string& text, char delim);

std::string join(const std::vector<std::string>& parts, const std::string& sep);

// First run of digits in the text, as an integer. Used for score parsing.
std::optional<int> parse_first_int(const std::string& text);

// FNV-1a, stable across platforms. Used to derive per-text RNG seeds.
uint64_t fnv1a64(const std::string& text);

}  // namespace taaco
