// Copyright 2026 The heterospec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "report.hpp"

#include <sstream>

#include "heterospec/errors.hpp"

namespace heterospec::cli {

Format parse_format(std::string_view tag) {
  if (tag == "json") return Format::kJson;
  if (tag == "csv") return Format::kCsv;
  if (tag == "md") return Format::kMarkdown;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown format '" + std::string(tag) + "'");
}

namespace {

std::string scalar(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos &&
      (s.empty() || (s.front() != ' ' && s.back() != ' '))) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string md_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n') {
      out += "<br>";
    } else {
      out += c;
    }
  }
  return out;
}

void md_pairs(std::ostringstream& os, const char* title, const Json& obj) {
  if (obj.empty()) return;
  os << "\n## " << title << "\n\n| key | value |\n|---|---|\n";
  for (const auto& [k, v] : obj.items()) {
    os << "| " << md_cell(k) << " | " << md_cell(scalar(v)) << " |\n";
  }
}

}  // namespace

std::string render(const Report& report, Format format) {
  std::ostringstream os;
  switch (format) {
    case Format::kJson: {
      Json doc;
      doc["command"] = report.command;
      doc["config"] = report.config;
      doc["summary"] = report.summary;
      doc["rows"] = report.rows;
      os << doc.dump(2) << "\n";
      break;
    }
    case Format::kCsv: {
      os << "# command: " << report.command << "\n";
      for (const auto& [k, v] : report.config.items()) {
        os << "# config." << k << ": " << scalar(v) << "\n";
      }
      for (const auto& [k, v] : report.summary.items()) {
        os << "# summary." << k << ": " << scalar(v) << "\n";
      }
      if (report.rows.empty()) break;
      bool first = true;
      for (const auto& [k, v] : report.rows.front().items()) {
        os << (first ? "" : ",") << csv_field(k);
        first = false;
      }
      os << "\n";
      for (const auto& row : report.rows) {
        first = true;
        for (const auto& [k, v] : row.items()) {
          os << (first ? "" : ",") << csv_field(scalar(v));
          first = false;
        }
        os << "\n";
      }
      break;
    }
    case Format::kMarkdown: {
      os << "# heterospec " << report.command << "\n";
      md_pairs(os, "Config", report.config);
      md_pairs(os, "Summary", report.summary);
      if (report.rows.empty()) break;
      os << "\n## Rows\n\n|";
      std::string rule = "|";
      for (const auto& [k, v] : report.rows.front().items()) {
        os << " " << md_cell(k) << " |";
        rule += "---|";
      }
      os << "\n" << rule << "\n";
      for (const auto& row : report.rows) {
        os << "|";
        for (const auto& [k, v] : row.items()) os << " " << md_cell(scalar(v)) << " |";
        os << "\n";
      }
      break;
    }
  }
  return os.str();
}

}  // namespace heterospec::cli
