// SPDX-License-Identifier: Apache-2.0
#pragma once

// JSON-Lines persistence for raw sessions, one object per line:
//   {"subject_id":..., "gender":"M"|"F", "label":..., "noisy":bool, "values":[180 numbers]}

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "signal_model.hpp"

namespace deepbrain {

inline nlohmann::ordered_json session_to_json(const RawSession& s) {
  nlohmann::ordered_json j;
  j["subject_id"] = s.subject_id();
  j["gender"] = gender_code(s.gender());
  j["label"] = class_name(s.label());
  j["noisy"] = s.noisy();
  j["values"] = std::vector<double>(s.values().begin(), s.values().end());
  return j;
}

inline RawSession session_from_json(const nlohmann::json& j) {
  try {
    return RawSession(j.at("values").get<std::vector<double>>(),
                      parse_class(j.at("label").get<std::string>()),
                      j.at("subject_id").get<std::string>(),
                      parse_gender(j.at("gender").get<std::string>()), j.at("noisy").get<bool>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed session record: ") + e.what());
  }
}

inline void write_sessions_jsonl(std::ostream& out, const SessionSet& set) {
  for (const auto& s : set.sessions) out << session_to_json(s).dump() << '\n';
}

inline SessionSet read_sessions_jsonl(std::istream& in) {
  SessionSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    set.sessions.push_back(session_from_json(j));
  }
  return set;
}

inline void save_sessions(const std::string& path, const SessionSet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  write_sessions_jsonl(out, set);
}

inline SessionSet load_sessions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  return read_sessions_jsonl(in);
}

}  // namespace deepbrain
