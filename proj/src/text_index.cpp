#include "geosearch/text_index.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "geosearch/errors.hpp"

namespace geosearch {

namespace {

bool is_token_byte(unsigned char ch) { return std::isalnum(ch) || ch >= 0x80; }

// UTF-8 to code points, so that `.` and bracket members stand for whole
// characters. Malformed sequences decode to U+FFFD.
std::wstring widen(std::string_view s) {
  std::wstring out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto b = static_cast<unsigned char>(s[i]);
    const std::size_t len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : (b >> 3) == 0x1E ? 4 : 0;
    char32_t cp = len == 1 ? b : len == 2 ? (b & 0x1F) : len == 3 ? (b & 0x0F) : (b & 0x07);
    bool ok = len != 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto c = static_cast<unsigned char>(s[i + k]);
      ok = (c & 0xC0) == 0x80;
      cp = (cp << 6) | (c & 0x3F);
    }
    if (ok) {
      out += static_cast<wchar_t>(cp);
      i += len;
    } else {
      out += L'\uFFFD';
      ++i;
    }
  }
  return out;
}

bool is_ascii_alnum(wchar_t ch) { return ch < 0x80 && std::isalnum(static_cast<int>(ch)); }

// Rewrites the supported pattern subset as an ECMAScript regex, escaping
// everything else so it matches literally.
std::wregex compile_pattern(std::string_view text) {
  const std::wstring pattern = widen(text);
  std::wstring out;
  out.reserve(pattern.size() * 2);
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const wchar_t ch = pattern[i];
    switch (ch) {
      case L'.':
      case L'*':
      case L'+':
      case L'?':
      case L'|':
      case L')':
      case L'^':
      case L'$':
        out += ch;
        break;
      case L'(':
        if (i + 1 < pattern.size() && pattern[i + 1] == L'?') {
          throw PatternError("invalid pattern: '(?' is not supported");
        }
        out += ch;
        break;
      case L'[': {
        const auto start = i;
        out += L'[';
        ++i;
        if (i < pattern.size() && pattern[i] == L'^') out += pattern[i++];
        bool first = true;
        for (; i < pattern.size() && (first || pattern[i] != L']'); ++i, first = false) {
          if (pattern[i] == L'\\' || pattern[i] == L']' || pattern[i] == L'[') out += L'\\';
          out += pattern[i];
        }
        if (i >= pattern.size()) {
          throw PatternError("invalid pattern: unterminated '[' at offset " + std::to_string(start));
        }
        out += L']';
        break;
      }
      case L'\\':
        if (i + 1 >= pattern.size()) throw PatternError("invalid pattern: trailing backslash");
        if (is_ascii_alnum(pattern[i + 1])) {
          throw PatternError(std::string("invalid pattern: unsupported escape \\") +
                             static_cast<char>(pattern[i + 1]));
        }
        out += L'\\';
        out += pattern[++i];
        break;
      case L'{':
      case L'}':
      case L']':
        out += L'\\';
        out += ch;
        break;
      default:
        out += ch;
    }
  }
  try {
    return std::wregex(out, std::regex::ECMAScript | std::regex::icase | std::regex::nosubs);
  } catch (const std::regex_error& e) {
    throw PatternError("invalid pattern '" + std::string(text) + "': " + e.what());
  }
}

}  // namespace

std::string_view to_string(Field f) {
  switch (f) {
    case Field::name:
      return "name";
    case Field::description:
      return "description";
    case Field::short_description:
      return "shortDescription";
    case Field::keywords:
      return "keywords";
  }
  return "?";
}

double FieldWeights::of(Field f) const {
  switch (f) {
    case Field::name:
      return name;
    case Field::description:
      return description;
    case Field::short_description:
      return short_description;
    case Field::keywords:
      return keywords;
  }
  return 0.0;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    const auto ch = static_cast<unsigned char>(c);
    if (is_token_byte(ch)) {
      current += static_cast<char>(std::tolower(ch));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

TextIndex::TextIndex(FieldWeights weights) : weights_(weights) {}

void TextIndex::index_entry(IndexedEntry entry) {
  if (entries_.contains(entry.identifier)) remove_entry(entry.identifier);

  auto add = [&](std::string_view text, Field field) {
    for (auto& token : tokenize(text)) ++postings_[token][entry.identifier][static_cast<std::size_t>(field)];
  };
  add(entry.name, Field::name);
  add(entry.description, Field::description);
  add(entry.short_description, Field::short_description);
  for (const auto& kw : entry.keywords) add(kw, Field::keywords);

  auto id = entry.identifier;
  entries_.emplace(std::move(id), std::move(entry));
}

void TextIndex::remove_entry(const std::string& identifier) {
  auto it = entries_.find(identifier);
  if (it == entries_.end()) throw NotFoundError("not found: " + identifier);
  for (auto p = postings_.begin(); p != postings_.end();) {
    p->second.erase(identifier);
    p = p->second.empty() ? postings_.erase(p) : std::next(p);
  }
  entries_.erase(it);
}

std::vector<std::string> TextIndex::identifiers() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [id, e] : entries_) out.push_back(id);
  return out;
}

std::vector<std::string> TextIndex::simple_search(std::string_view pattern) const {
  const auto re = compile_pattern(pattern);
  std::vector<std::string> out;
  for (const auto& [id, e] : entries_) {
    if (std::regex_search(widen(e.name), re)) out.push_back(id);
  }
  return out;
}

std::vector<SearchHit> TextIndex::extended_search(std::string_view query) const {
  std::map<std::string, SearchHit> acc;
  for (const auto& token : tokenize(query)) {
    auto p = postings_.find(token);
    if (p == postings_.end()) continue;
    for (const auto& [id, freq] : p->second) {
      auto& hit = acc[id];
      hit.identifier = id;
      for (std::size_t f = 0; f < kFieldCount; ++f) {
        if (freq[f] == 0) continue;
        hit.score += freq[f] * weights_.of(static_cast<Field>(f));
        hit.matched_fields.insert(static_cast<Field>(f));
      }
    }
  }
  std::vector<SearchHit> out;
  for (auto& [id, hit] : acc) {
    if (hit.score > 0) out.push_back(std::move(hit));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SearchHit& a, const SearchHit& b) { return a.score > b.score; });
  return out;
}

}  // namespace geosearch
