// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tablepref/image.hpp"
#include "tablepref/scene.hpp"

namespace tablepref {

inline constexpr int kMaxCatalogObjects = 125;
inline constexpr int kStudyInstancesPerClass = 25;

struct TableSpec {
    std::string id;
    std::string image;  // path relative to the catalog root

    bool operator==(const TableSpec&) const = default;
};

/// Objects and table backgrounds available to a study or benchmark. Images are
/// shared, immutable, and may be absent for programmatically built catalogs.
class Catalog {
public:
    /// Throws LoadError on a duplicate or out-of-range id.
    void add_object(ObjectSpec spec, std::shared_ptr<const Image> sprite = nullptr);
    void add_table(TableSpec spec, std::shared_ptr<const Image> image = nullptr);

    const std::vector<ObjectSpec>& objects() const noexcept { return objects_; }
    const std::vector<TableSpec>& tables() const noexcept { return tables_; }
    std::size_t size() const noexcept { return objects_.size(); }

    const ObjectSpec* find(int id) const noexcept;
    const ObjectSpec& at(int id) const;
    std::vector<const ObjectSpec*> of_class(ObjectClass cls) const;

    const Image* sprite(int id) const noexcept;
    const TableSpec* find_table(std::string_view id) const noexcept;
    const Image* table_image(std::string_view id) const noexcept;

private:
    std::vector<ObjectSpec> objects_;
    std::map<int, std::size_t> index_;
    std::map<int, std::shared_ptr<const Image>> sprites_;
    std::vector<TableSpec> tables_;
    std::map<std::string, std::shared_ptr<const Image>, std::less<>> table_images_;
};

/// Loads `<dir>/catalog.json` (array of object records) and, when present,
/// `<dir>/tables.json` ([{id, image}]). `path` may also name the manifest file
/// directly; assets resolve relative to its directory.
Catalog load_catalog(const std::string& path);

/// Writes manifest, table list and every attached image under `dir`.
void write_catalog(const Catalog& catalog, const std::string& dir);

/// True iff every class holds exactly 25 instances.
bool is_study_catalog(const Catalog& catalog);

/// Deterministic 125-object catalog with generated flat-colour sprites and
/// five table backgrounds (table_0 .. table_4).
Catalog make_placeholder_catalog();

/// RGB used for a colour when drawing placeholder sprites.
Rgba color_rgba(Color c);

}  // namespace tablepref
