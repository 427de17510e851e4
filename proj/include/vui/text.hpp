#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small ASCII text helpers shared by the parsers, the model store and the
// simulator. Non-ASCII bytes pass through untouched.
namespace vui::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);

// Lowercase, trim and collapse internal whitespace runs to one space.
std::string normalize(std::string_view s);

std::vector<std::string> split_words(std::string_view s);
std::size_t word_count(std::string_view s);

bool starts_with_word(std::string_view haystack, std::string_view word);
bool contains_ci(std::string_view haystack, std::string_view needle);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Quoted, comma-separated, bracketed list: ["a", "b"].
std::string format_list(const std::vector<std::string>& items);

}  // namespace vui::text
