// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string_view>

namespace tablepref {

/// Object lifting (Language / Marked) crossed with arrangement lifting
/// (UnMarked / Grid-Marked).
enum class Method { LOUMA, LOGMA, MOUMA, MOGMA };

inline constexpr std::array<Method, 4> kAllMethods = {Method::LOUMA, Method::LOGMA, Method::MOUMA, Method::MOGMA};

std::string_view to_string(Method m);
/// Case-insensitive. Throws ConfigError.
Method parse_method(std::string_view s);

constexpr bool uses_grid(Method m) { return m == Method::LOGMA || m == Method::MOGMA; }
constexpr bool uses_object_sheets(Method m) { return m == Method::MOUMA || m == Method::MOGMA; }

}  // namespace tablepref
