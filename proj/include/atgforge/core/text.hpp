#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace atgforge {

/// Canonical form used for every text comparison in the pipeline: NFC,
/// whitespace runs collapsed to one space, ends trimmed.
std::string normalize_text(std::string_view raw);

std::string trim(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

bool starts_with_word(std::string_view text, std::string_view word);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view s);

}  // namespace atgforge
