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

#ifndef HETEROSPEC_CLI_REPORT_HPP_
#define HETEROSPEC_CLI_REPORT_HPP_

#include <string>
#include <string_view>

#include "json.hpp"

namespace heterospec::cli {

using Json = nlohmann::ordered_json;

enum class Format { kJson, kCsv, kMarkdown };

Format parse_format(std::string_view tag);

// config and summary are flat objects of scalars; rows is an array of
// objects sharing one set of keys.
struct Report {
  std::string command;
  Json config = Json::object();
  Json summary = Json::object();
  Json rows = Json::array();
};

std::string render(const Report& report, Format format);

}  // namespace heterospec::cli

#endif  // HETEROSPEC_CLI_REPORT_HPP_
