// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>

#include <doctest.h>

#include "tablepref/io.hpp"
#include "tablepref/model_client.hpp"
#include "tablepref/prompts.hpp"
#include "prompt_fixture.hpp"
#include "test_support.hpp"

using namespace tablepref;
using tablepref::testing::fixture_bundle;
using tablepref::testing::snapshot_of;

namespace {

// Set TABLEPREF_UPDATE_SNAPSHOTS=1 to rewrite the stored snapshots.
void check_snapshot(const PromptBundle& b) {
    const std::filesystem::path path =
        std::filesystem::path(TABLEPREF_SNAPSHOT_DIR) / ("prompt_" + std::string(to_string(b.method)) + ".txt");
    const std::string actual = snapshot_of(b);
    if (const char* update = std::getenv("TABLEPREF_UPDATE_SNAPSHOTS"); update != nullptr && *update == '1') {
        write_file_atomic(path.string(), actual);
    }
    REQUIRE(std::filesystem::exists(path));
    CHECK(read_text_file(path.string()) == actual);
}

}  // namespace

TEST_CASE("prompt snapshots") {
    for (Method m : kAllMethods) {
        CAPTURE(to_string(m));
        check_snapshot(fixture_bundle(m));
    }
}

TEST_CASE("templates appear verbatim at the start of every prompt") {
    const std::string_view opening = "My preferences for setting a table are shown in the ";
    for (Method m : kAllMethods) {
        const PromptBundle b = fixture_bundle(m);
        CHECK(b.text.starts_with(prompt_template(m)));
        CHECK(prompt_template(m).starts_with(opening));
    }
    CHECK(prompts::kObjectsAsLanguage.find("\xE2\x80\x98rotation\xE2\x80\x99: degrees}]") != std::string_view::npos);
    CHECK(prompts::kUnmarkedArrangements.find("final_state_K.jpg") != std::string_view::npos);
    CHECK(prompts::kGridMarkedArrangements.find("final_state_N.jpg") != std::string_view::npos);
    CHECK(prompts::kGridMarkedArrangements.ends_with("Include only this list in your response. "));
}
