// Copyright 2026 The Dialret Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DIALRET_TEXT_H_
#define DIALRET_TEXT_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dialret {

// Strips leading and trailing ASCII whitespace.
std::string_view Trim(std::string_view s);

// Lowercases ASCII letters and splits on every maximal run of
// non-alphanumeric bytes. Bytes >= 0x80 count as alphanumeric so UTF-8
// words stay intact.
std::vector<std::string> Tokenize(std::string_view text);

// 64-bit FNV-1a, optionally chained from a previous hash value.
std::uint64_t Fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

std::string HexU64(std::uint64_t value);

}  // namespace dialret

#endif  // DIALRET_TEXT_H_
