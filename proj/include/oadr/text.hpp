#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace oadr::text {

bool is_space(char c);
std::string_view trim(std::string_view s);

/// Lowercased maximal runs of ASCII alphanumerics; bytes >= 0x80 count as
/// word characters so UTF-8 words stay whole.
std::vector<std::string> word_tokens(std::string_view s);

/// Whitespace-delimited token count.
std::size_t count_tokens(std::string_view s);

/// Collapses whitespace runs to one space and trims both ends.
std::string normalize_whitespace(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view separator);

}  // namespace oadr::text
