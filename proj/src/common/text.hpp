// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vqar::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
bool contains(std::string_view haystack, std::string_view needle);

// Replace every "{key}" occurrence in `tmpl`.
std::string substitute(std::string tmpl, std::string_view key, std::string_view value);

}  // namespace vqar::text
