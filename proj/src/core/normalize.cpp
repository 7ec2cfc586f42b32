#include <algorithm>
#include <array>
#include <regex>

#include "topicforge/corpus.hpp"
#include "topicforge/error.hpp"
#include "utf8.hpp"

namespace topicforge {
namespace {

// Replacement tokens travel through the pipeline as \x1F<tag>\x1F so that later
// steps (punctuation in particular) cannot eat their brackets.
constexpr char kSentinel = '\x1F';
constexpr std::array<char, 4> kTags = {'U', 'E', 'M', 'D'};

std::string sentinel(char tag) {
  return std::string(" ") + kSentinel + tag + kSentinel + " ";
}

const std::string& token_for(char tag, const NormalizationConfig& cfg) {
  switch (tag) {
    case 'U': return cfg.url_token;
    case 'E': return cfg.email_token;
    case 'M': return cfg.user_token;
    default: return cfg.digit_token;
  }
}

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\v' || c == U'\f' ||
         c == 0x85 || c == 0xA0 || c == 0x1680 || (c >= 0x2000 && c <= 0x200A) ||
         c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

// Zero-width and bidi marks, BOM, tatweel.
bool is_invisible(char32_t c) {
  return c == 0x200B || c == 0x200C || c == 0x200E || c == 0x200F ||
         (c >= 0x202A && c <= 0x202E) || (c >= 0x2066 && c <= 0x2069) || c == 0xFEFF ||
         c == 0x0640;
}

bool is_control(char32_t c) { return c < 0x20 || c == 0x7F || (c >= 0x80 && c < 0xA0); }

bool is_digit(char32_t c) {
  return (c >= U'0' && c <= U'9') || (c >= 0x0660 && c <= 0x0669) || (c >= 0x06F0 && c <= 0x06F9);
}

// Separators allowed inside a number: 1,000 / 3.5 / Arabic decimal and
// thousands separators.
bool is_number_separator(char32_t c) {
  return c == U'.' || c == U',' || c == 0x066B || c == 0x066C;
}

bool is_emoji(char32_t c) {
  return (c >= 0x1F000 && c <= 0x1FAFF) || (c >= 0x2600 && c <= 0x27BF) ||
         (c >= 0x2B00 && c <= 0x2BFF) || (c >= 0x2300 && c <= 0x23FF) ||
         (c >= 0xFE00 && c <= 0xFE0F) || c == 0x200D || c == 0x20E3 ||
         (c >= 0xE0020 && c <= 0xE007F) || c == 0x3030 || c == 0x303D || c == 0x3297 ||
         c == 0x3299 || c == 0xA9 || c == 0xAE || c == 0x2122 || c == 0x2139 ||
         (c >= 0x2190 && c <= 0x21FF);
}

bool is_punctuation(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  if (c >= 0xA1 && c <= 0xBF) {
    return c != 0xAA && c != 0xB2 && c != 0xB3 && c != 0xB5 && c != 0xB9 && c != 0xBA;
  }
  return c == 0xD7 || c == 0xF7 || (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x20A0 && c <= 0x20CF) || c == 0x060C || c == 0x060D || c == 0x061B ||
         c == 0x061E || c == 0x061F || (c >= 0x066A && c <= 0x066D) || c == 0x06D4 ||
         c == 0xFD3E || c == 0xFD3F || (c >= 0x3001 && c <= 0x3003) ||
         (c >= 0x3008 && c <= 0x3011) || (c >= 0xFF01 && c <= 0xFF0F);
}

struct Patterns {
  std::regex html_tag{R"(<[/!]?[A-Za-z][^<>]*>)"};
  std::regex html_entity{R"(&(?:[A-Za-z]+|#[0-9]+|#[xX][0-9A-Fa-f]+);)"};
  std::regex url{"(?:[A-Za-z][A-Za-z0-9+.\\-]*://|www\\.)[^\\s\\x1F]+"};
  std::regex email{R"([A-Za-z0-9._%+\-]+@[A-Za-z0-9.\-]+\.[A-Za-z]{2,})"};
  std::regex mention{R"(@[A-Za-z0-9_]+)"};
};

const Patterns& patterns() {
  static const Patterns p;
  return p;
}

// Controls, invisible marks and exotic spaces, then protect tokens already
// present in the input.
std::string prepare(std::string_view raw, const NormalizationConfig& cfg) {
  std::u32string cps = utf8::decode(raw);
  std::u32string cleaned;
  cleaned.reserve(cps.size());
  for (char32_t c : cps) {
    if (is_invisible(c)) continue;
    if (is_space(c) || is_control(c)) {
      cleaned.push_back(U' ');
    } else {
      cleaned.push_back(c);
    }
  }
  std::string s = utf8::encode(cleaned);
  for (char tag : kTags) {
    const std::string& token = token_for(tag, cfg);
    std::string out;
    std::size_t pos = 0;
    while (true) {
      std::size_t hit = s.find(token, pos);
      if (hit == std::string::npos) break;
      out.append(s, pos, hit - pos);
      out += sentinel(tag);
      pos = hit + token.size();
    }
    out.append(s, pos, std::string::npos);
    s = std::move(out);
  }
  return s;
}

std::string pass(std::string_view raw, const NormalizationConfig& cfg) {
  const Patterns& re = patterns();
  std::string s = prepare(raw, cfg);

  if (cfg.strip_html) {
    s = std::regex_replace(s, re.html_tag, " ");
    s = std::regex_replace(s, re.html_entity, " ");
  }
  s = std::regex_replace(s, re.url, sentinel('U'));
  s = std::regex_replace(s, re.email, sentinel('E'));
  s = std::regex_replace(s, re.mention, sentinel('M'));

  std::u32string cps = utf8::decode(s);
  std::u32string out;
  out.reserve(cps.size());
  const std::u32string digit_marker = U" \x1F" U"D" U"\x1F ";
  for (std::size_t i = 0; i < cps.size();) {
    const char32_t c = cps[i];
    if (is_digit(c)) {
      std::size_t j = i + 1;
      while (j < cps.size()) {
        if (is_digit(cps[j])) {
          ++j;
        } else if (is_number_separator(cps[j]) && j + 1 < cps.size() && is_digit(cps[j + 1])) {
          j += 2;
        } else {
          break;
        }
      }
      out += digit_marker;
      i = j;
      continue;
    }
    if (c == static_cast<char32_t>(kSentinel)) {
      // Copy the protected token verbatim.
      out.push_back(c);
      if (i + 2 < cps.size()) {
        out.push_back(cps[i + 1]);
        out.push_back(cps[i + 2]);
      }
      i += 3;
      continue;
    }
    if ((cfg.strip_emoji && is_emoji(c)) || (cfg.strip_punctuation && is_punctuation(c))) {
      out.push_back(U' ');
    } else {
      out.push_back(c);
    }
    ++i;
  }

  // Restore tokens, collapse whitespace, trim.
  std::string result;
  result.reserve(out.size() * 2);
  bool pending_space = false;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const char32_t c = out[i];
    if (c == U' ') {
      pending_space = !result.empty();
      continue;
    }
    if (pending_space) {
      result.push_back(' ');
      pending_space = false;
    }
    if (c == static_cast<char32_t>(kSentinel) && i + 2 < out.size()) {
      result += token_for(static_cast<char>(out[i + 1]), cfg);
      i += 2;
      continue;
    }
    utf8::append(result, c);
  }
  return result;
}

}  // namespace

void NormalizationConfig::validate() const {
  for (const std::string* token : {&url_token, &email_token, &user_token, &digit_token}) {
    if (token->empty()) raise(ErrorCode::kInvalidArgument, "replacement token is empty");
    for (char32_t c : utf8::decode(*token)) {
      if (is_space(c) || is_control(c) || is_invisible(c)) {
        raise(ErrorCode::kInvalidArgument, "replacement token contains whitespace: '" + *token + "'");
      }
    }
  }
}

NormalizationConfig NormalizationConfig::from_json(const nlohmann::json& j) {
  NormalizationConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "url_token") cfg.url_token = value.get<std::string>();
    else if (key == "email_token") cfg.email_token = value.get<std::string>();
    else if (key == "user_token") cfg.user_token = value.get<std::string>();
    else if (key == "digit_token") cfg.digit_token = value.get<std::string>();
    else if (key == "strip_punctuation") cfg.strip_punctuation = value.get<bool>();
    else if (key == "strip_emoji") cfg.strip_emoji = value.get<bool>();
    else if (key == "strip_html") cfg.strip_html = value.get<bool>();
    else raise(ErrorCode::kConfig, "unknown normalization key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

nlohmann::json NormalizationConfig::to_json() const {
  return {{"url_token", url_token},
          {"email_token", email_token},
          {"user_token", user_token},
          {"digit_token", digit_token},
          {"strip_punctuation", strip_punctuation},
          {"strip_emoji", strip_emoji},
          {"strip_html", strip_html}};
}

std::string normalize_text(std::string_view raw, const NormalizationConfig& cfg) {
  // A single pass is already a fixed point for the default configuration;
  // with punctuation kept, removing one tag can expose another, so iterate.
  std::string current = pass(raw, cfg);
  for (int i = 0; i < 8; ++i) {
    std::string next = pass(current, cfg);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

}  // namespace topicforge
