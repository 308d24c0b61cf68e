// Copyright 2026 The pbekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// UTF-8 helpers. Strings are stored as UTF-8 bytes throughout the library;
// lengths and edit distances are measured in unicode scalar values.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pbekit::text {

// Decodes UTF-8 into scalar values. Malformed bytes decode to U+FFFD, one
// per offending byte, so every input has a well-defined length.
std::u32string decode(std::string_view s);

std::string encode(std::u32string_view s);
std::string encode(char32_t c);

// Number of scalar values in s.
std::size_t length(std::string_view s);

// Byte offsets of every scalar boundary, including 0 and s.size().
std::vector<std::size_t> boundaries(std::string_view s);

}  // namespace pbekit::text
