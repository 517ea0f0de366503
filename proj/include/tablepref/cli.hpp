// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tablepref {

/// Exit codes: 0 success, 2 usage, 3 data, 4 provider.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitProvider = 4;

/// Runs the `tablepref` command line. `args` excludes the program name.
/// Data goes to `out`; logs and the single-line JSON error go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tablepref
