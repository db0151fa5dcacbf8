// Copyright 2026 The qpecf Authors
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
#pragma once

#include <string>
#include <string_view>

namespace qpecf {

/// Decimal text with 12 significant digits ("%.12g"). Integral values keep a
/// trailing ".0" so the column stays visibly floating point.
std::string format_sig12(double value);

/// value rounded to 12 significant digits, for JSON emission.
double round_sig12(double value);

/// Parses a real given either as a decimal literal or as an exact ratio "p/q"
/// (p, q integers, q != 0). A ratio yields the double nearest to p/q.
/// Throws DomainError on malformed text.
double parse_real(std::string_view text);

}  // namespace qpecf
