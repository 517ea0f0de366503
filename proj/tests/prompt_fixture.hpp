// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "tablepref/model_client.hpp"
#include "test_support.hpp"

namespace tablepref::testing {

/// Stored snapshot form: method, samples, image names with sizes, then the text.
inline std::string snapshot_of(const PromptBundle& b) {
    std::string out = "method: " + std::string(to_string(b.method)) + "\nsamples: " + std::to_string(b.samples) +
                      "\nimages:\n";
    for (const PromptImage& im : b.images) {
        out += "  " + im.name + " " + std::to_string(im.image.pixels.width()) + "x" +
               std::to_string(im.image.pixels.height()) + "\n";
    }
    out += "text:\n" + b.text;
    return out;
}

/// Two context arrangements on table_1 and table_2, empty table_0 target.
inline PromptBundle fixture_bundle(Method m) {
    PreferenceContext ctx;
    ctx.owner = "snapshot";
    ctx.entries.push_back({Arrangement{"table_1", {{75, 0.5, 0.5, 0.0}, {25, 0.3125, 0.5, 0.0}, {50, 0.6875, 0.5, 0.0}}},
                           ""});
    ctx.entries.push_back({Arrangement{"table_2", {{77, 0.5, 0.5, 0.0}, {2, 0.75, 0.25, 90.0}}}, ""});
    return build_prompt(m, ctx, placeholder_catalog(), Arrangement{"table_0", {}},
                        uses_grid(m) ? std::optional<GridSpec>(GridSpec{}) : std::nullopt);
}

}  // namespace tablepref::testing
