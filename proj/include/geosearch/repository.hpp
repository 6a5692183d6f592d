#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "geosearch/construction.hpp"
#include "geosearch/fingerprint.hpp"
#include "geosearch/inference.hpp"
#include "geosearch/matcher.hpp"
#include "geosearch/text_index.hpp"

namespace geosearch {

using Json = nlohmann::ordered_json;

enum class EntryKind : std::uint8_t { construction, conjecture };

std::string_view to_string(EntryKind k);
std::optional<EntryKind> parse_entry_kind(std::string_view text);

inline constexpr int kEntryFormatVersion = 1;

/// Caller-supplied part of an entry; the repository adds the fingerprint.
struct EntryDraft {
  std::optional<std::string> identifier;
  std::string name;
  std::string description;
  std::string short_description;
  std::vector<std::string> keywords;
  std::string code;
  std::string language = "en";
  int level = 3;
  EntryKind kind = EntryKind::construction;

  friend bool operator==(const EntryDraft&, const EntryDraft&) = default;
};

struct ProblemEntry {
  std::string identifier;
  std::string name;
  std::string description;
  std::string short_description;
  std::vector<std::string> keywords;
  std::string code;
  std::string language = "en";
  int level = 3;
  EntryKind kind = EntryKind::construction;
  Gtd gtd;

  friend bool operator==(const ProblemEntry&, const ProblemEntry&) = default;
};

/// Draft members: Identifier (optional), Name, Description,
/// ShortDescription, Keywords, Code, Language, Level, Kind. Unknown
/// members are rejected with ProtocolError.
Json draft_to_json(const EntryDraft& d);
EntryDraft draft_from_json(const Json& j);

/// Entry file document: the draft members plus GTD and Version.
Json entry_to_json(const ProblemEntry& e);
ProblemEntry entry_from_json(const Json& j);

/// A JSON array of drafts.
std::vector<EntryDraft> load_drafts(const std::filesystem::path& file);

/// `GEO` + 4 digits, or any `[A-Za-z0-9_]{1,64}` supplied by the caller.
bool is_valid_identifier(std::string_view id);

enum class FilterKey : std::uint8_t { format, kind, language, level, keyword };

struct FilterPredicate {
  FilterKey key;
  std::string value;

  friend bool operator==(const FilterPredicate&, const FilterPredicate&) = default;
};

/// Conjunction of key=value predicates; empty matches everything.
struct FilterSet {
  std::vector<FilterPredicate> predicates;

  bool empty() const { return predicates.empty(); }
  bool matches(const ProblemEntry& e) const;

  friend bool operator==(const FilterSet&, const FilterSet&) = default;
};

/// Parts are separated by the literal ` AND `. Throws FilterError.
FilterSet parse_filters(std::string_view text);

/// Stored entries are always in the textual predicate format.
inline constexpr std::string_view kStoredFormat = "predicate";

struct DuplicateReport {
  std::vector<std::string> exact_duplicates;    // mutual subconstructions
  std::vector<std::string> containing_entries;  // new is inside existing
  std::vector<std::string> contained_entries;   // existing is inside new

  bool blocking() const { return !exact_duplicates.empty() || !containing_entries.empty(); }
  bool empty() const { return !blocking() && contained_entries.empty(); }

  friend bool operator==(const DuplicateReport&, const DuplicateReport&) = default;
};

struct InsertResult {
  /// Set when the entry was stored.
  std::optional<std::string> identifier;
  DuplicateReport report;

  bool inserted() const { return identifier.has_value(); }
};

struct GeometricHit {
  std::string identifier;
  std::optional<Embedding> embedding;
};

struct GeometricResult {
  std::vector<GeometricHit> hits;
  /// One line per candidate whose confirmation ran out of budget.
  std::vector<std::string> warnings;
};

enum class TextMode : std::uint8_t { simple, extended };

struct RepositoryConfig {
  std::filesystem::path data_dir;
  RuleSet rules = default_rules();
  int gtd_depth = kDefaultGtdDepth;
  std::uint64_t step_budget = kDefaultStepBudget;
  FieldWeights weights{};
};

/// File-backed store of problem entries, one JSON document per entry under
/// `<data_dir>/entries/`. Reads may run concurrently; writes are serialized.
class Repository {
 public:
  /// Creates the directory layout if missing, loads every entry, rebuilds
  /// the text index and rewrites any stale fingerprint cache.
  explicit Repository(RepositoryConfig config);

  Repository(const Repository&) = delete;
  Repository& operator=(const Repository&) = delete;

  InsertResult insert(EntryDraft draft, bool force);
  void update(const std::string& identifier, EntryDraft draft);
  void remove(const std::string& identifier);

  ProblemEntry get(const std::string& identifier) const;
  std::vector<std::string> list_all() const;
  bool contains(const std::string& identifier) const;
  std::size_t size() const;

  GeometricResult geometric_query(const Construction& query, const FilterSet& filters, bool confirm) const;
  std::vector<std::string> text_query(std::string_view text, TextMode mode, const FilterSet& filters) const;

  /// Structural relation of `c` to every stored entry.
  DuplicateReport find_duplicates(const Construction& c) const;

  /// Identifiers whose stored fingerprint differs from a fresh computation.
  std::vector<std::string> verify_caches() const;
  /// Identifiers whose cache was rewritten while opening.
  const std::vector<std::string>& refreshed_on_open() const { return refreshed_; }

  const RepositoryConfig& config() const { return config_; }
  std::filesystem::path entry_path(const std::string& identifier) const;

 private:
  struct Stored {
    ProblemEntry entry;
    Construction closed;
  };

  Stored compile(ProblemEntry entry) const;
  ProblemEntry materialize(EntryDraft draft, std::string identifier) const;
  DuplicateReport duplicates_locked(const Construction& closed, const Gtd& fingerprint) const;
  std::string next_identifier_locked() const;
  void persist(const ProblemEntry& e) const;
  static IndexedEntry index_view(const ProblemEntry& e);

  RepositoryConfig config_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Stored> entries_;
  TextIndex index_;
  std::vector<std::string> refreshed_;
};

}  // namespace geosearch
