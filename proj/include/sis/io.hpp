#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sis/error.hpp"

namespace sis {

using json = nlohmann::json;

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(errc::io, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(errc::io, "write failed for " + path.string());
}

inline json parse_json(const std::string& text, const std::string& what) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(errc::parse, "malformed JSON in " + what);
  }
  return doc;
}

// JSON-lines: one document per non-empty line.
inline std::vector<json> parse_jsonl(const std::string& text,
                                     const std::string& what) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded()) {
      throw Error(errc::parse,
                  "malformed JSON at " + what + " line " + std::to_string(lineno));
    }
    out.push_back(std::move(doc));
  }
  return out;
}

inline std::string join_jsonl(const std::vector<json>& docs) {
  std::string out;
  for (const json& doc : docs) {
    out += doc.dump();
    out += '\n';
  }
  return out;
}

inline const json& require_field(const json& doc, const char* key,
                                 const std::string& what) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    throw Error(errc::parse, what + ": missing field '" + key + "'");
  }
  return *it;
}

}  // namespace sis
