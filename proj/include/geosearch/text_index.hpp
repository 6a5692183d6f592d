#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace geosearch {

enum class Field : std::uint8_t { name, description, short_description, keywords };

inline constexpr std::size_t kFieldCount = 4;

std::string_view to_string(Field f);

struct IndexedEntry {
  std::string identifier;
  std::string name;
  std::string description;
  std::string short_description;
  std::vector<std::string> keywords;

  friend bool operator==(const IndexedEntry&, const IndexedEntry&) = default;
};

struct SearchHit {
  std::string identifier;
  double score = 0.0;
  std::set<Field> matched_fields;

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

struct FieldWeights {
  double name = 4.0;
  double keywords = 3.0;
  double short_description = 2.0;
  double description = 1.0;

  double of(Field f) const;
};

/// Lowercased maximal runs of ASCII letters/digits; bytes >= 0x80 count as
/// letters so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

/// In-memory index over entry text fields. Not internally synchronized.
class TextIndex {
 public:
  explicit TextIndex(FieldWeights weights = {});

  /// Adds or replaces the entry with the same identifier.
  void index_entry(IndexedEntry entry);
  /// Throws NotFoundError for an unknown identifier.
  void remove_entry(const std::string& identifier);

  bool contains(const std::string& identifier) const { return entries_.contains(identifier); }
  std::size_t size() const { return entries_.size(); }
  std::vector<std::string> identifiers() const;

  /// Regular-expression search over names, unanchored unless the pattern
  /// uses `^`/`$`. Matches by character, not byte; case folding is ASCII
  /// only. Supports literals, `.`, `*`, `+`, `?`, `[...]`, `|`, `(...)`,
  /// `^`, `$` and backslash-escaped punctuation. Throws PatternError.
  /// Results sorted by identifier.
  std::vector<std::string> simple_search(std::string_view pattern) const;

  /// OR over query tokens; score sums term frequency times field weight.
  /// Sorted by score descending, then identifier.
  std::vector<SearchHit> extended_search(std::string_view query) const;

  /// Same entries and postings.
  friend bool operator==(const TextIndex& a, const TextIndex& b) {
    return a.entries_ == b.entries_ && a.postings_ == b.postings_;
  }

 private:
  using Frequencies = std::array<std::uint32_t, kFieldCount>;

  FieldWeights weights_;
  std::map<std::string, IndexedEntry> entries_;
  std::unordered_map<std::string, std::map<std::string, Frequencies>> postings_;
};

}  // namespace geosearch
