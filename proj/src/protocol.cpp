#include "geosearch/protocol.hpp"

#include <iostream>
#include <set>

#include "geosearch/errors.hpp"

namespace geosearch {

namespace {

const std::set<std::string> kRequestMembers{"Query", "GeometricQuery", "Insert", "Filters", "Mode", "Confirm", "Force"};

Json parse_line(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  if (line.find('\n') != std::string_view::npos) throw ProtocolError("message must be a single line");
  try {
    return Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw ProtocolError(std::string("malformed JSON: ") + e.what());
  }
}

const Json& typed(const Json& j, const char* key, Json::value_t type, const char* type_name) {
  const Json& v = j.at(key);
  if (v.type() != type && !(type == Json::value_t::number_integer && v.is_number_integer())) {
    throw ProtocolError(std::string("member ") + key + " must be " + type_name);
  }
  return v;
}

Json string_array(const std::vector<std::string>& v) {
  Json out = Json::array();
  for (const auto& s : v) out.push_back(s);
  return out;
}

std::vector<std::string> string_list(const Json& j, const char* key) {
  if (!j.contains(key)) throw ProtocolError(std::string("missing member ") + key);
  const Json& v = j.at(key);
  if (!v.is_array()) throw ProtocolError(std::string("member ") + key + " must be an array");
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string()) throw ProtocolError(std::string("member ") + key + " must hold strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

TheoremRecord decode_record(const std::string& id, const Json& j) {
  if (!j.is_object()) throw ProtocolError("result " + id + " must be an object");
  TheoremRecord r;
  for (const auto& [key, value] : j.items()) {
    if (key == "Name" || key == "Description" || key == "Code") {
      if (!value.is_string()) throw ProtocolError("result " + id + ": member " + key + " must be a string");
    } else if (key == "Match") {
      if (!value.is_object()) throw ProtocolError("result " + id + ": member Match must be an object");
      std::map<std::string, std::string> m;
      for (const auto& [q, t] : value.items()) {
        if (!t.is_string()) throw ProtocolError("result " + id + ": Match values must be strings");
        m.emplace(q, t.get<std::string>());
      }
      r.match = std::move(m);
    } else {
      throw ProtocolError("result " + id + ": unknown member " + key);
    }
  }
  for (const char* key : {"Name", "Description", "Code"}) {
    if (!j.contains(key)) throw ProtocolError("result " + id + ": missing member " + key);
  }
  r.name = j.at("Name").get<std::string>();
  r.description = j.at("Description").get<std::string>();
  r.code = j.at("Code").get<std::string>();
  return r;
}

}  // namespace

std::string encode_request(const QueryRequest& r) {
  Json j = Json::object();
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, TextQuery>) {
          j["Query"] = body.text;
          if (r.filters) j["Filters"] = *r.filters;
          if (body.mode) j["Mode"] = *body.mode == TextMode::simple ? "simple" : "extended";
        } else if constexpr (std::is_same_v<T, GeometricQuery>) {
          j["GeometricQuery"] = body.code;
          if (r.filters) j["Filters"] = *r.filters;
          if (body.confirm) j["Confirm"] = *body.confirm;
        } else {
          j["Insert"] = draft_to_json(body.draft);
          if (body.force) j["Force"] = *body.force;
        }
      },
      r.body);
  return j.dump() + "\n";
}

QueryRequest decode_request(std::string_view line) {
  const Json j = parse_line(line);
  if (!j.is_object()) throw ProtocolError("request must be a JSON object");
  int primaries = 0;
  for (const auto& [key, value] : j.items()) {
    if (!kRequestMembers.contains(key)) throw ProtocolError("unknown member " + key);
    if (key == "Query" || key == "GeometricQuery" || key == "Insert") ++primaries;
  }
  if (primaries != 1) {
    throw ProtocolError("request must contain exactly one of Query, GeometricQuery, Insert");
  }
  auto only_with = [&](const char* key, const char* primary) {
    if (j.contains(key) && !j.contains(primary)) {
      throw ProtocolError(std::string("member ") + key + " is only valid with " + primary);
    }
  };
  only_with("Mode", "Query");
  only_with("Confirm", "GeometricQuery");
  only_with("Force", "Insert");
  if (j.contains("Filters") && j.contains("Insert")) throw ProtocolError("member Filters is not valid with Insert");

  QueryRequest r;
  if (j.contains("Filters")) r.filters = typed(j, "Filters", Json::value_t::string, "a string").get<std::string>();
  if (j.contains("Query")) {
    TextQuery q{typed(j, "Query", Json::value_t::string, "a string").get<std::string>(), std::nullopt};
    if (j.contains("Mode")) {
      const auto mode = typed(j, "Mode", Json::value_t::string, "a string").get<std::string>();
      if (mode == "simple") {
        q.mode = TextMode::simple;
      } else if (mode == "extended") {
        q.mode = TextMode::extended;
      } else {
        throw ProtocolError("member Mode must be \"simple\" or \"extended\"");
      }
    }
    r.body = std::move(q);
  } else if (j.contains("GeometricQuery")) {
    GeometricQuery q{typed(j, "GeometricQuery", Json::value_t::string, "a string").get<std::string>(), std::nullopt};
    if (j.contains("Confirm")) q.confirm = typed(j, "Confirm", Json::value_t::boolean, "a boolean").get<bool>();
    r.body = std::move(q);
  } else {
    InsertRequest ins{draft_from_json(j.at("Insert")), std::nullopt};
    if (j.contains("Force")) ins.force = typed(j, "Force", Json::value_t::boolean, "a boolean").get<bool>();
    r.body = std::move(ins);
  }
  return r;
}

std::string encode_response(const QueryResponse& r) {
  Json j = Json::object();
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, ResultSet>) {
          for (const auto& [id, rec] : body.theorems) {
            Json item = Json::object();
            item["Name"] = rec.name;
            item["Description"] = rec.description;
            item["Code"] = rec.code;
            if (rec.match) {
              Json m = Json::object();
              for (const auto& [q, t] : *rec.match) m[q] = t;
              item["Match"] = std::move(m);
            }
            j[id] = std::move(item);
          }
        } else if constexpr (std::is_same_v<T, InsertReply>) {
          j["Status"] = body.inserted() ? "inserted" : "duplicate";
          j["Identifier"] = body.identifier ? Json(*body.identifier) : Json(nullptr);
          Json d = Json::object();
          d["Exact"] = string_array(body.duplicates.exact_duplicates);
          d["Containing"] = string_array(body.duplicates.containing_entries);
          d["Contained"] = string_array(body.duplicates.contained_entries);
          j["Duplicates"] = std::move(d);
        } else {
          j["Error"] = body.message;
        }
      },
      r);
  return j.dump() + "\n";
}

QueryResponse decode_response(std::string_view line) {
  const Json j = parse_line(line);
  if (!j.is_object()) throw ProtocolError("response must be a JSON object");

  if (j.size() == 1 && j.contains("Error") && j.at("Error").is_string()) {
    return ErrorReply{j.at("Error").get<std::string>()};
  }
  if (j.contains("Status") && j.at("Status").is_string()) {
    const auto status = j.at("Status").get<std::string>();
    if (status != "inserted" && status != "duplicate") throw ProtocolError("unknown Status " + status);
    for (const auto& [key, value] : j.items()) {
      if (key != "Status" && key != "Identifier" && key != "Duplicates") {
        throw ProtocolError("unknown member " + key + " in insert reply");
      }
    }
    InsertReply reply;
    if (!j.contains("Identifier")) throw ProtocolError("missing member Identifier");
    const Json& id = j.at("Identifier");
    if (status == "inserted") {
      if (!id.is_string()) throw ProtocolError("inserted reply needs a string Identifier");
      reply.identifier = id.get<std::string>();
    } else if (!id.is_null()) {
      throw ProtocolError("duplicate reply must have a null Identifier");
    }
    if (!j.contains("Duplicates") || !j.at("Duplicates").is_object()) {
      throw ProtocolError("member Duplicates must be an object");
    }
    const Json& d = j.at("Duplicates");
    reply.duplicates.exact_duplicates = string_list(d, "Exact");
    reply.duplicates.containing_entries = string_list(d, "Containing");
    reply.duplicates.contained_entries = string_list(d, "Contained");
    return reply;
  }
  ResultSet rs;
  for (const auto& [id, value] : j.items()) rs.theorems.emplace_back(id, decode_record(id, value));
  return rs;
}

// --- dispatch ---------------------------------------------------------------

ResultSet RequestHandler::records(const std::vector<std::string>& ids) const {
  ResultSet rs;
  for (const auto& id : ids) {
    auto e = repo_.get(id);
    rs.theorems.emplace_back(id, TheoremRecord{std::move(e.name), std::move(e.description), std::move(e.code), {}});
  }
  return rs;
}

QueryResponse RequestHandler::handle(const QueryRequest& request) {
  const FilterSet filters = parse_filters(request.filters.value_or(""));
  return std::visit(
      [&](const auto& body) -> QueryResponse {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, TextQuery>) {
          return records(repo_.text_query(body.text, body.mode.value_or(TextMode::simple), filters));
        } else if constexpr (std::is_same_v<T, GeometricQuery>) {
          const auto result = repo_.geometric_query(parse_construction(body.code), filters, body.confirm.value_or(true));
          for (const auto& w : result.warnings) std::cerr << "geoserver: warning: " << w << '\n';
          ResultSet rs;
          for (const auto& hit : result.hits) {
            auto e = repo_.get(hit.identifier);
            TheoremRecord rec{std::move(e.name), std::move(e.description), std::move(e.code), {}};
            if (hit.embedding) rec.match = hit.embedding->mapping;
            rs.theorems.emplace_back(hit.identifier, std::move(rec));
          }
          return rs;
        } else {
          auto result = repo_.insert(body.draft, body.force.value_or(false));
          return InsertReply{std::move(result.identifier), std::move(result.report)};
        }
      },
      request.body);
}

std::string RequestHandler::handle_line(std::string_view line) noexcept {
  try {
    try {
      return encode_response(handle(decode_request(line)));
    } catch (const std::exception& e) {
      return encode_response(ErrorReply{e.what()});
    }
  } catch (...) {
    return "{\"Error\":\"internal error\"}\n";
  }
}

}  // namespace geosearch
