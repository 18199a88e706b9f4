#pragma once

// Domain model for API metadata extracted from one repository snapshot, plus
// the line-delimited index file that persists it.

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lancekit {

inline constexpr int kSchemaVersion = 1;

enum class Language { Python, Java };

enum class Visibility { Public, Private, Protected, Package, Unspecified };

enum class EntityKind { Class, Module };

enum class ImportKind { ModuleAlias, EntityImport, Wildcard };

std::string_view to_string(Language language);
std::string_view to_string(Visibility visibility);
std::string_view to_string(EntityKind kind);
std::string_view to_string(ImportKind kind);

std::optional<Language> parse_language(std::string_view text);
std::optional<Visibility> parse_visibility(std::string_view text);
std::optional<EntityKind> parse_entity_kind(std::string_view text);
std::optional<ImportKind> parse_import_kind(std::string_view text);

/// File extension (with dot) indexed for a language.
std::string_view source_extension(Language language);

/// Half-open byte range [start, end) into a source file.
struct ByteSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    auto operator<=>(const ByteSpan&) const = default;
};

struct Parameter {
    std::string name;
    /// Present only when the type is written in source.
    std::optional<std::string> declared_type;
    std::optional<std::string> comment;

    bool operator==(const Parameter&) const = default;
};

/// One extracted function or method: name, visibility, parameters, comment and
/// return type, plus where it lives.
struct ApiFunction {
    std::string name;
    Visibility visibility = Visibility::Unspecified;
    std::vector<Parameter> parameters;
    std::optional<std::string> comment;
    std::optional<std::string> return_type;
    /// Fully qualified name of the enclosing class or module.
    std::optional<std::string> owner;
    /// Repo-relative path with forward slashes.
    std::string file;
    ByteSpan span;

    /// `owner.name`, or just `name` when there is no owner.
    std::string qualified_name() const;

    bool operator==(const ApiFunction&) const = default;
};

struct EntityRecord {
    std::string name;
    EntityKind kind = EntityKind::Class;
    std::vector<std::string> supertypes;
    std::optional<std::string> comment;
    std::string file;
    /// Methods as span starts of ApiFunctions declared in `file`.
    std::vector<std::size_t> methods;

    bool operator==(const EntityRecord&) const = default;
};

struct ImportBinding {
    /// Empty only for wildcard imports.
    std::string local_name;
    std::string target;
    ImportKind kind = ImportKind::ModuleAlias;
    std::string file;
    /// Python `from . import x` style; target was prefixed with the importing package.
    bool relative = false;
    /// Target does not resolve to anything inside the index.
    bool external = false;

    bool operator==(const ImportBinding&) const = default;
};

struct RepoIndex {
    std::string repo_root;
    Language language = Language::Python;
    std::vector<ApiFunction> functions;
    std::vector<EntityRecord> entities;
    std::map<std::string, std::vector<ImportBinding>> imports_by_file;
    std::string created_at;
    int schema_version = kSchemaVersion;
    /// Files that failed to parse and contributed nothing.
    std::vector<std::string> skipped_files;

    const EntityRecord* find_entity(std::string_view name) const;
    const ApiFunction* find_function(std::string_view file, std::size_t span_start) const;
    std::vector<const ApiFunction*> methods_of(const EntityRecord& entity) const;
    std::span<const ImportBinding> imports_for(std::string_view file) const;
    /// Functions whose `owner.name` equals `qualified` (several when overloaded).
    std::vector<const ApiFunction*> functions_named(std::string_view qualified) const;
    std::size_t import_count() const;

    bool operator==(const RepoIndex&) const = default;
};

/// Referential-integrity and uniqueness problems; empty when the index is sound.
std::vector<std::string> validate(const RepoIndex& index);

/// Writes one header record followed by one record per function, entity and import.
void save_index(const RepoIndex& index, const std::filesystem::path& destination);

/// Serialized form of `save_index`, one record per line.
std::string serialize_index(const RepoIndex& index);

RepoIndex load_index(const std::filesystem::path& source);
RepoIndex parse_index(std::string_view text);

/// Current UTC time as ISO-8601 (seconds precision).
std::string utc_timestamp();

/// 1-based line and column of a byte offset, for display.
std::pair<std::size_t, std::size_t> line_column(std::string_view content, std::size_t offset);

}  // namespace lancekit
