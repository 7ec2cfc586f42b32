#pragma once

#include <string>
#include <string_view>

namespace topicforge::utf8 {

// Lenient decode: malformed sequences are skipped.
std::u32string decode(std::string_view bytes);

void append(std::string& out, char32_t cp);
std::string encode(std::u32string_view cps);

}  // namespace topicforge::utf8
