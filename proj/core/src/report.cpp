#include <cstdio>
#include <cstdlib>
#include <string>

#include "gfam/error.hpp"
#include "gfam/harness.hpp"
#include "json.hpp"

namespace gfam {

namespace {

using nlohmann::json;

json::json_pointer pointer(const std::string& dotted) {
  std::string p = "/";
  for (char c : dotted) p.push_back(c == '.' ? '/' : c);
  return json::json_pointer(p);
}

std::string csv_field(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows(1);
  std::string cell;
  bool quoted = false, in_quotes = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = quoted = true;
    } else if (c == ',') {
      rows.back().push_back(std::move(cell));
      cell.clear();
      quoted = false;
    } else if (c == '\n') {
      rows.back().push_back(std::move(cell));
      cell.clear();
      quoted = false;
      rows.emplace_back();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  if (!cell.empty() || quoted || !rows.back().empty()) rows.back().push_back(std::move(cell));
  if (rows.back().empty()) rows.pop_back();
  return rows;
}

}  // namespace

std::string to_json(const RunReport& r) {
  json j = json::object();
  RunReport::fields(r, [&](const std::string& name, const auto& v) { j[pointer(name)] = v; });
  return j.dump(2) + "\n";
}

RunReport report_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("report: ") + e.what());
  }
  RunReport r;
  RunReport::fields(r, [&](const std::string& name, auto& v) {
    auto p = pointer(name);
    if (!j.contains(p)) throw ConfigError("report: missing field " + name);
    try {
      v = j.at(p).template get<std::decay_t<decltype(v)>>();
    } catch (const json::exception&) {
      throw ConfigError("report: field " + name + " has the wrong type");
    }
  });
  return r;
}

std::string to_csv(const RunReport& r) {
  std::string header, values;
  RunReport::fields(r, [&](const std::string& name, const auto& v) {
    using T = std::decay_t<decltype(v)>;
    if (!header.empty()) {
      header.push_back(',');
      values.push_back(',');
    }
    header += name;
    if constexpr (std::is_same_v<T, std::string>) {
      values += csv_field(v);
    } else if constexpr (std::is_same_v<T, double>) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      values += buf;
    } else {
      values += std::to_string(v);
    }
  });
  return header + "\n" + values + "\n";
}

RunReport report_from_csv(std::string_view text) {
  auto rows = parse_csv(text);
  if (rows.size() != 2 || rows[0].size() != rows[1].size()) throw ConfigError("report: malformed CSV");
  RunReport r;
  std::size_t i = 0;
  RunReport::fields(r, [&](const std::string& name, auto& v) {
    using T = std::decay_t<decltype(v)>;
    if (i >= rows[0].size() || rows[0][i] != name) throw ConfigError("report: CSV column mismatch at " + name);
    const std::string& cell = rows[1][i++];
    if constexpr (std::is_same_v<T, std::string>)
      v = cell;
    else if constexpr (std::is_same_v<T, double>)
      v = std::strtod(cell.c_str(), nullptr);
    else
      v = std::strtoull(cell.c_str(), nullptr, 10);
  });
  return r;
}

}  // namespace gfam
