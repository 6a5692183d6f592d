#include "geosearch/repository.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>

#include "geosearch/detail/text.hpp"
#include "geosearch/errors.hpp"

namespace geosearch {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kDraftMembers{"Identifier", "Name",     "Description", "ShortDescription", "Keywords",
                                          "Code",       "Language", "Level",       "Kind"};

const Json* member(const Json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

std::string string_member(const Json& j, const char* key, bool required, std::string fallback = {}) {
  const Json* v = member(j, key);
  if (!v) {
    if (required) throw ProtocolError(std::string("missing member ") + key);
    return fallback;
  }
  if (!v->is_string()) throw ProtocolError(std::string("member ") + key + " must be a string");
  return v->get<std::string>();
}

void write_all(int fd, const std::string& data, const fs::path& path) {
  std::size_t off = 0;
  while (off < data.size()) {
    const auto n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw StorageError("write " + path.string() + ": " + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

// Write-temp, fsync, rename, fsync directory: readers and restarts see either
// the old document or the new one, never a torn file.
void atomic_write(const fs::path& target, const std::string& data) {
  const fs::path tmp = target.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw StorageError("open " + tmp.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, data, tmp);
    if (::fsync(fd) != 0) throw StorageError("fsync " + tmp.string() + ": " + std::strerror(errno));
  } catch (...) {
    ::close(fd);
    ::unlink(tmp.c_str());
    throw;
  }
  ::close(fd);
  if (::rename(tmp.c_str(), target.c_str()) != 0) {
    const int err = errno;
    ::unlink(tmp.c_str());
    throw StorageError("rename " + tmp.string() + ": " + std::strerror(err));
  }
  const int dir = ::open(target.parent_path().c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (dir >= 0) {
    ::fsync(dir);
    ::close(dir);
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool equals_icase(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

void validate_draft_fields(const EntryDraft& d) {
  if (detail::trim(d.name).empty()) throw ValidationError("entry name must not be empty");
  if (d.level < 1 || d.level > 5) throw ValidationError("level must be between 1 and 5, got " + std::to_string(d.level));
  if (d.language.empty()) throw ValidationError("language must not be empty");
}

Construction parse_valid(const std::string& code) {
  Construction c = parse_construction(code);
  if (auto v = validate(c); !v.empty()) throw ValidationError(v.front().subject + ": " + v.front().rule);
  return c;
}

}  // namespace

// --- entry kinds and JSON -------------------------------------------------

std::string_view to_string(EntryKind k) { return k == EntryKind::conjecture ? "conjecture" : "construction"; }

std::optional<EntryKind> parse_entry_kind(std::string_view text) {
  if (text == "construction") return EntryKind::construction;
  if (text == "conjecture") return EntryKind::conjecture;
  return std::nullopt;
}

Json draft_to_json(const EntryDraft& d) {
  Json j = Json::object();
  if (d.identifier) j["Identifier"] = *d.identifier;
  j["Name"] = d.name;
  j["Description"] = d.description;
  j["ShortDescription"] = d.short_description;
  j["Keywords"] = d.keywords;
  j["Code"] = d.code;
  j["Language"] = d.language;
  j["Level"] = d.level;
  j["Kind"] = to_string(d.kind);
  return j;
}

EntryDraft draft_from_json(const Json& j) {
  if (!j.is_object()) throw ProtocolError("entry draft must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kDraftMembers.contains(key)) throw ProtocolError("unknown member " + key + " in entry draft");
  }
  EntryDraft d;
  if (member(j, "Identifier")) d.identifier = string_member(j, "Identifier", true);
  d.name = string_member(j, "Name", true);
  d.description = string_member(j, "Description", false);
  d.short_description = string_member(j, "ShortDescription", false);
  d.code = string_member(j, "Code", true);
  d.language = string_member(j, "Language", false, "en");
  if (const Json* kw = member(j, "Keywords")) {
    if (!kw->is_array()) throw ProtocolError("member Keywords must be an array of strings");
    for (const auto& k : *kw) {
      if (!k.is_string()) throw ProtocolError("member Keywords must be an array of strings");
      d.keywords.push_back(k.get<std::string>());
    }
  }
  if (const Json* level = member(j, "Level")) {
    if (!level->is_number_integer()) throw ProtocolError("member Level must be an integer");
    d.level = level->get<int>();
  }
  if (const Json* kind = member(j, "Kind")) {
    if (!kind->is_string()) throw ProtocolError("member Kind must be a string");
    auto k = parse_entry_kind(kind->get<std::string>());
    if (!k) throw ProtocolError("member Kind must be \"construction\" or \"conjecture\"");
    d.kind = *k;
  }
  return d;
}

Json entry_to_json(const ProblemEntry& e) {
  Json j = Json::object();
  j["Identifier"] = e.identifier;
  j["Name"] = e.name;
  j["Description"] = e.description;
  j["ShortDescription"] = e.short_description;
  j["Keywords"] = e.keywords;
  j["Code"] = e.code;
  j["Language"] = e.language;
  j["Level"] = e.level;
  j["Kind"] = to_string(e.kind);
  j["GTD"] = serialize_gtd(e.gtd);
  j["Version"] = kEntryFormatVersion;
  return j;
}

ProblemEntry entry_from_json(const Json& j) {
  if (!j.is_object()) throw ProtocolError("entry must be a JSON object");
  const Json* version = member(j, "Version");
  if (!version || !version->is_number_integer() || version->get<int>() != kEntryFormatVersion) {
    throw ProtocolError("unsupported entry format version");
  }
  Json draft_part = j;
  draft_part.erase("GTD");
  draft_part.erase("Version");
  EntryDraft d = draft_from_json(draft_part);
  if (!d.identifier) throw ProtocolError("missing member Identifier");
  ProblemEntry e{*d.identifier,      d.name,     d.description, d.short_description, d.keywords,
                 d.code,             d.language, d.level,       d.kind,              {}};
  e.gtd = parse_gtd(string_member(j, "GTD", true));
  return e;
}

std::vector<EntryDraft> load_drafts(const fs::path& file) {
  Json doc;
  try {
    doc = Json::parse(read_file(file));
  } catch (const Json::parse_error& e) {
    throw StorageError(file.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw StorageError(file.string() + ": expected a JSON array of drafts");
  std::vector<EntryDraft> out;
  for (const auto& item : doc) out.push_back(draft_from_json(item));
  return out;
}

bool is_valid_identifier(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

// --- filters ----------------------------------------------------------------

FilterSet parse_filters(std::string_view text) {
  FilterSet out;
  if (detail::trim(text).empty()) return out;

  std::vector<std::string_view> parts;
  constexpr std::string_view kAnd = " AND ";
  std::size_t start = 0;
  for (auto pos = text.find(kAnd); pos != std::string_view::npos; pos = text.find(kAnd, start)) {
    parts.push_back(text.substr(start, pos - start));
    start = pos + kAnd.size();
  }
  parts.push_back(text.substr(start));

  for (auto raw : parts) {
    const auto part = detail::trim(raw);
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) throw FilterError("malformed filter: '" + std::string(part) + "'");
    const auto key = detail::trim(part.substr(0, eq));
    const auto value = std::string(detail::trim(part.substr(eq + 1)));
    if (key.empty()) throw FilterError("malformed filter: '" + std::string(part) + "'");
    if (value.empty()) throw FilterError("invalid filter value: empty value for " + std::string(key));

    FilterPredicate pred{FilterKey::format, value};
    if (key == "format") {
      if (value != "predicate" && value != "ggb" && value != "i2gatp") {
        throw FilterError("invalid filter value: format=" + value);
      }
      pred.key = FilterKey::format;
    } else if (key == "kind") {
      if (!parse_entry_kind(value)) throw FilterError("invalid filter value: kind=" + value);
      pred.key = FilterKey::kind;
    } else if (key == "language") {
      pred.key = FilterKey::language;
    } else if (key == "level") {
      int level = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), level);
      if (ec != std::errc{} || ptr != value.data() + value.size() || level < 1 || level > 5) {
        throw FilterError("invalid filter value: level=" + value);
      }
      pred.key = FilterKey::level;
    } else if (key == "keyword") {
      pred.key = FilterKey::keyword;
    } else {
      throw FilterError("unknown filter key: " + std::string(key));
    }
    out.predicates.push_back(std::move(pred));
  }
  return out;
}

bool FilterSet::matches(const ProblemEntry& e) const {
  for (const auto& p : predicates) {
    switch (p.key) {
      case FilterKey::format:
        if (p.value != kStoredFormat) return false;
        break;
      case FilterKey::kind:
        if (p.value != to_string(e.kind)) return false;
        break;
      case FilterKey::language:
        if (!equals_icase(p.value, e.language)) return false;
        break;
      case FilterKey::level:
        if (p.value != std::to_string(e.level)) return false;
        break;
      case FilterKey::keyword:
        if (std::none_of(e.keywords.begin(), e.keywords.end(),
                         [&](const std::string& k) { return equals_icase(k, p.value); })) {
          return false;
        }
        break;
    }
  }
  return true;
}

// --- repository -------------------------------------------------------------

Repository::Repository(RepositoryConfig config) : config_(std::move(config)), index_(config_.weights) {
  if (config_.gtd_depth < 0 || config_.gtd_depth > kMaxGtdDepth) {
    throw std::invalid_argument("GTD depth must be 0, 1 or 2");
  }
  const fs::path dir = config_.data_dir / "entries";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw StorageError("cannot create " + dir.string() + ": " + ec.message());

  std::vector<fs::path> files;
  for (const auto& item : fs::directory_iterator(dir)) {
    const auto& path = item.path();
    if (path.extension() == ".tmp") {
      // Leftover from an interrupted write; never part of the store.
      fs::remove(path, ec);
    } else if (path.extension() == ".json") {
      files.push_back(path);
    }
  }
  std::sort(files.begin(), files.end());

  for (const auto& path : files) {
    ProblemEntry stored_entry;
    try {
      stored_entry = entry_from_json(Json::parse(read_file(path)));
    } catch (const std::exception& e) {
      throw StorageError(path.string() + ": " + e.what());
    }
    if (path.stem() != stored_entry.identifier) {
      throw StorageError(path.string() + ": file name does not match Identifier " + stored_entry.identifier);
    }
    const Gtd cached = stored_entry.gtd;
    Stored s;
    try {
      s = compile(std::move(stored_entry));
    } catch (const Error& e) {
      throw StorageError(path.string() + ": " + e.what());
    }
    if (s.entry.gtd != cached) {
      persist(s.entry);
      refreshed_.push_back(s.entry.identifier);
    }
    index_.index_entry(index_view(s.entry));
    auto id = s.entry.identifier;
    entries_.emplace(std::move(id), std::move(s));
  }
}

Repository::Stored Repository::compile(ProblemEntry entry) const {
  Stored s;
  s.closed = close(parse_valid(entry.code), config_.rules);
  entry.gtd = gtd_of_closed(s.closed, config_.gtd_depth);
  s.entry = std::move(entry);
  return s;
}

ProblemEntry Repository::materialize(EntryDraft d, std::string identifier) const {
  return ProblemEntry{std::move(identifier),
                      std::move(d.name),
                      std::move(d.description),
                      std::move(d.short_description),
                      std::move(d.keywords),
                      std::move(d.code),
                      std::move(d.language),
                      d.level,
                      d.kind,
                      {}};
}

IndexedEntry Repository::index_view(const ProblemEntry& e) {
  return {e.identifier, e.name, e.description, e.short_description, e.keywords};
}

fs::path Repository::entry_path(const std::string& identifier) const {
  return config_.data_dir / "entries" / (identifier + ".json");
}

void Repository::persist(const ProblemEntry& e) const {
  atomic_write(entry_path(e.identifier), entry_to_json(e).dump(2) + "\n");
}

std::string Repository::next_identifier_locked() const {
  for (int n = 1; n <= 9999; ++n) {
    std::string id = std::to_string(n);
    id = "GEO" + std::string(4 - id.size(), '0') + id;
    if (!entries_.contains(id)) return id;
  }
  throw StorageError("identifier space GEO0001..GEO9999 exhausted");
}

DuplicateReport Repository::duplicates_locked(const Construction& closed, const Gtd& fingerprint) const {
  DuplicateReport report;
  for (const auto& [id, s] : entries_) {
    auto embeds = [&](const Construction& q, const Gtd& qg, const Construction& t, const Gtd& tg) {
      if (!gtd_subsumes(tg, qg)) return false;
      auto r = match_closed(q, t, 1, config_.step_budget);
      if (r.embeddings.empty() && r.status == MatchStatus::budget_exhausted) {
        std::cerr << "geosearch: duplicate check against " << id << " ran out of budget\n";
      }
      return !r.embeddings.empty();
    };
    const bool inside = embeds(closed, fingerprint, s.closed, s.entry.gtd);
    const bool around = embeds(s.closed, s.entry.gtd, closed, fingerprint);
    if (inside && around) {
      report.exact_duplicates.push_back(id);
    } else if (inside) {
      report.containing_entries.push_back(id);
    } else if (around) {
      report.contained_entries.push_back(id);
    }
  }
  return report;
}

InsertResult Repository::insert(EntryDraft draft, bool force) {
  validate_draft_fields(draft);
  if (draft.identifier && !is_valid_identifier(*draft.identifier)) {
    throw ValidationError("malformed identifier '" + *draft.identifier + "'");
  }
  // Parse and close outside the lock; only the store lookup needs it.
  std::optional<std::string> wanted = draft.identifier;
  Stored s = compile(materialize(std::move(draft), wanted.value_or("")));

  std::unique_lock lock(mutex_);
  if (wanted && entries_.contains(*wanted)) throw ValidationError("identifier already in use: " + *wanted);

  InsertResult result;
  result.report = duplicates_locked(s.closed, s.entry.gtd);
  if (!force && result.report.blocking()) return result;

  s.entry.identifier = wanted ? *wanted : next_identifier_locked();
  persist(s.entry);
  index_.index_entry(index_view(s.entry));
  result.identifier = s.entry.identifier;
  auto id = s.entry.identifier;
  entries_.emplace(std::move(id), std::move(s));
  return result;
}

void Repository::update(const std::string& identifier, EntryDraft draft) {
  validate_draft_fields(draft);
  if (draft.identifier && *draft.identifier != identifier) {
    throw ValidationError("draft identifier " + *draft.identifier + " does not match " + identifier);
  }
  Stored s = compile(materialize(std::move(draft), identifier));

  std::unique_lock lock(mutex_);
  auto it = entries_.find(identifier);
  if (it == entries_.end()) throw NotFoundError("not found: " + identifier);
  persist(s.entry);
  index_.index_entry(index_view(s.entry));
  it->second = std::move(s);
}

void Repository::remove(const std::string& identifier) {
  std::unique_lock lock(mutex_);
  auto it = entries_.find(identifier);
  if (it == entries_.end()) throw NotFoundError("not found: " + identifier);
  std::error_code ec;
  fs::remove(entry_path(identifier), ec);
  if (ec) throw StorageError("cannot remove " + entry_path(identifier).string() + ": " + ec.message());
  index_.remove_entry(identifier);
  entries_.erase(it);
}

ProblemEntry Repository::get(const std::string& identifier) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(identifier);
  if (it == entries_.end()) throw NotFoundError("not found: " + identifier);
  return it->second.entry;
}

std::vector<std::string> Repository::list_all() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [id, s] : entries_) out.push_back(id);
  return out;
}

bool Repository::contains(const std::string& identifier) const {
  std::shared_lock lock(mutex_);
  return entries_.contains(identifier);
}

std::size_t Repository::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

GeometricResult Repository::geometric_query(const Construction& query, const FilterSet& filters,
                                            bool confirm) const {
  if (auto v = validate(query); !v.empty()) throw ValidationError(v.front().subject + ": " + v.front().rule);
  const Construction closed = close(query, config_.rules);
  const Gtd fingerprint = gtd_of_closed(closed, config_.gtd_depth);

  std::shared_lock lock(mutex_);
  GeometricResult out;
  for (const auto& [id, s] : entries_) {
    if (!filters.matches(s.entry) || !gtd_subsumes(s.entry.gtd, fingerprint)) continue;
    if (!confirm) {
      out.hits.push_back({id, std::nullopt});
      continue;
    }
    auto r = match_closed(closed, s.closed, 1, config_.step_budget);
    if (!r.embeddings.empty()) {
      out.hits.push_back({id, std::move(r.embeddings.front())});
    } else if (r.status == MatchStatus::budget_exhausted) {
      out.warnings.push_back(id + ": match budget exhausted after " + std::to_string(r.steps) + " steps");
    }
  }
  return out;
}

std::vector<std::string> Repository::text_query(std::string_view text, TextMode mode,
                                                const FilterSet& filters) const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> hits;
  if (mode == TextMode::simple) {
    hits = index_.simple_search(text);
  } else {
    for (auto& h : index_.extended_search(text)) hits.push_back(std::move(h.identifier));
  }
  std::erase_if(hits, [&](const std::string& id) { return !filters.matches(entries_.at(id).entry); });
  return hits;
}

DuplicateReport Repository::find_duplicates(const Construction& c) const {
  if (auto v = validate(c); !v.empty()) throw ValidationError(v.front().subject + ": " + v.front().rule);
  const Construction closed = close(c, config_.rules);
  const Gtd fingerprint = gtd_of_closed(closed, config_.gtd_depth);
  std::shared_lock lock(mutex_);
  return duplicates_locked(closed, fingerprint);
}

std::vector<std::string> Repository::verify_caches() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> stale;
  for (const auto& [id, s] : entries_) {
    const Construction closed = close(parse_construction(s.entry.code), config_.rules);
    const Gtd fresh = gtd_of_closed(closed, config_.gtd_depth);
    bool coherent = fresh == s.entry.gtd;
    try {
      const auto on_disk = entry_from_json(Json::parse(read_file(entry_path(id))));
      coherent = coherent && on_disk.gtd == fresh && on_disk.code == s.entry.code;
    } catch (const std::exception&) {
      coherent = false;
    }
    if (!coherent) stale.push_back(id);
  }
  return stale;
}

}  // namespace geosearch
