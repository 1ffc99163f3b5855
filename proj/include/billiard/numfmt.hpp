// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

namespace billiard {

/// Decimal rendering with 15 significant digits. Every CSV, JSON and record
/// value written by the library goes through here.
std::string fmt15(double value);

/// value rounded to 15 significant digits (the double nearest fmt15(value)).
double round15(double value);

/// Strict parse of a whole string as a double; throws Error(Format) otherwise.
double parse_double(std::string_view text, std::string_view what);
long parse_long(std::string_view text, std::string_view what);

}  // namespace billiard
