#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "geosearch/repository.hpp"

namespace geosearch {

// Requests ------------------------------------------------------------------

struct TextQuery {
  std::string text;
  std::optional<TextMode> mode;  // absent means simple

  friend bool operator==(const TextQuery&, const TextQuery&) = default;
};

struct GeometricQuery {
  std::string code;
  std::optional<bool> confirm;  // absent means true

  friend bool operator==(const GeometricQuery&, const GeometricQuery&) = default;
};

struct InsertRequest {
  EntryDraft draft;
  std::optional<bool> force;  // absent means false

  friend bool operator==(const InsertRequest&, const InsertRequest&) = default;
};

/// One of `Query`, `GeometricQuery` or `Insert`, plus optional members:
/// `Filters` (queries), `Mode` (text), `Confirm` (geometric), `Force` (insert).
struct QueryRequest {
  std::variant<TextQuery, GeometricQuery, InsertRequest> body;
  std::optional<std::string> filters;

  friend bool operator==(const QueryRequest&, const QueryRequest&) = default;
};

/// Single-line JSON terminated by '\n'.
std::string encode_request(const QueryRequest& r);
/// Accepts one line, with or without its terminator. Throws ProtocolError.
QueryRequest decode_request(std::string_view line);

// Responses -----------------------------------------------------------------

struct TheoremRecord {
  std::string name;
  std::string description;
  std::string code;
  /// Query object -> entry object, present for confirmed geometric hits.
  std::optional<std::map<std::string, std::string>> match;

  friend bool operator==(const TheoremRecord&, const TheoremRecord&) = default;
};

/// `{ "<identifier>": {"Name":..., "Description":..., "Code":...}, ... }`
/// in result order. Zero hits encode as `{}`.
struct ResultSet {
  std::vector<std::pair<std::string, TheoremRecord>> theorems;

  friend bool operator==(const ResultSet&, const ResultSet&) = default;
};

/// `{"Status": "inserted"|"duplicate", "Identifier": id|null,
///   "Duplicates": {"Exact": [...], "Containing": [...], "Contained": [...]}}`
struct InsertReply {
  std::optional<std::string> identifier;  // set iff inserted
  DuplicateReport duplicates;

  bool inserted() const { return identifier.has_value(); }
  friend bool operator==(const InsertReply&, const InsertReply&) = default;
};

/// `{"Error": "<message>"}`
struct ErrorReply {
  std::string message;

  friend bool operator==(const ErrorReply&, const ErrorReply&) = default;
};

using QueryResponse = std::variant<ResultSet, InsertReply, ErrorReply>;

std::string encode_response(const QueryResponse& r);
QueryResponse decode_response(std::string_view line);

// Dispatch ------------------------------------------------------------------

/// Turns requests into repository calls. Never throws from handle_line:
/// every failure becomes an ErrorReply.
class RequestHandler {
 public:
  explicit RequestHandler(Repository& repo) : repo_(repo) {}

  QueryResponse handle(const QueryRequest& request);
  std::string handle_line(std::string_view line) noexcept;

 private:
  ResultSet records(const std::vector<std::string>& ids) const;

  Repository& repo_;
};

}  // namespace geosearch
