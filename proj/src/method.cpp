// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include "tablepref/method.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "tablepref/error.hpp"

namespace tablepref {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::LOUMA: return "LOUMA";
        case Method::LOGMA: return "LOGMA";
        case Method::MOUMA: return "MOUMA";
        case Method::MOGMA: return "MOGMA";
    }
    return "?";
}

Method parse_method(std::string_view s) {
    std::string up(s);
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
    for (Method m : kAllMethods) {
        if (to_string(m) == up) {
            return m;
        }
    }
    throw ConfigError("unknown method '" + std::string(s) + "' (expected LOUMA, LOGMA, MOUMA or MOGMA)");
}

}  // namespace tablepref
