#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace flusig {

// Sentinel tokens. Angle brackets cannot appear in tokens derived from text
// (they are split away as punctuation), so these never collide.
inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kUserToken = "<user>";

// Normalizes one short message into tokens:
//   - ASCII-lowercased
//   - http(s)://... and www.... chunks become <url>
//   - @mentions become <user>
//   - a leading '#' is stripped from hashtags (#H1N1 -> h1n1)
//   - splits on whitespace and punctuation, keeping intra-word apostrophes
//     (i've, don't); U+2019 is treated as an apostrophe
//   - empty tokens are dropped
std::vector<std::string> tokenize(std::string_view text);

// Message length in Unicode code points (UTF-8 aware).
std::size_t text_length(std::string_view text);

}  // namespace flusig
