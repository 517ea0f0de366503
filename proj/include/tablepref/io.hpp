// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace tablepref {

std::string read_text_file(const std::string& path);

/// Writes through a temporary sibling and renames over the target.
void write_file_atomic(const std::string& path, std::string_view contents);
void write_file_atomic(const std::string& path, std::span<const std::uint8_t> contents);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);
void write_json_file(const std::string& path, const nlohmann::ordered_json& j);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);
std::string base64_encode(std::span<const std::uint8_t> bytes);

}  // namespace tablepref
