#pragma once

#include "lancekit/repo_model.hpp"
#include "lancekit/syntax_tree.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lancekit {

/// What a grammar node means to the shared traversal.
enum class NodeRole {
    Function,     // emits an ApiFunction
    Constructor,  // opens a function scope, emits nothing
    Class,        // emits an EntityRecord of kind class
    Import,       // decoded by the adapter's import rule
    Package,      // Java package declaration
    Decorated,    // wrapper carrying decorators for the definition below it
};

/// How to pull a parameter's name and type out of a parameter node.
struct ParameterRule {
    enum class Name { WholeText, Field, FirstNamedChild, DeclaratorChild };
    enum class Type { None, Field, FirstNamedChildSpread };

    Name name = Name::WholeText;
    Type type = Type::None;
};

enum class DocStyle {
    LeadingBodyString,      // first string statement of the body (Python)
    PrecedingCommentBlock,  // adjacent comments right before the declaration (Java)
};

/// Node-kind tables for one grammar. Adapters share the traversal skeleton in
/// the extractor and differ only in these tables.
struct LanguageAdapter {
    Language language;
    std::unordered_map<std::string_view, NodeRole> roles;
    std::unordered_map<std::string_view, ParameterRule> parameters;
    std::unordered_map<std::string_view, Visibility> visibility_keywords;
    std::vector<std::string_view> comment_kinds;
    std::vector<std::string_view> interface_kinds;   // members default to public
    std::vector<std::string_view> supertype_fields;  // fields of a class node listing supertypes
    std::string_view parameters_field;
    std::string_view return_type_field;
    std::string_view body_field;
    std::string_view modifiers_kind;
    std::string_view dimensions_field;
    Visibility default_visibility = Visibility::Unspecified;
    DocStyle doc_style = DocStyle::LeadingBodyString;
    /// Implicit receiver parameters dropped from methods (`self`, `cls`).
    std::vector<std::string_view> receiver_parameters;
    /// Whether each file is itself a module entity.
    bool file_is_module = false;
};

const LanguageAdapter& adapter_for(Language language);

struct FileExtraction {
    std::vector<ApiFunction> functions;
    std::vector<EntityRecord> entities;
    std::vector<ImportBinding> imports;
    std::size_t nodes_visited = 0;
};

/// Runs the shared traversal over a whole tree. `file` is the repo-relative path.
FileExtraction extract_file(const SyntaxTree& tree, std::string_view file);

std::vector<ApiFunction> extract_functions(const SyntaxTree& tree, std::string_view file);
std::vector<ImportBinding> extract_imports(const SyntaxTree& tree, std::string_view file);

/// Dotted Python module for a repo-relative path (`pkg/mod.py` -> `pkg.mod`,
/// `pkg/__init__.py` -> `pkg`).
std::string python_module_name(std::string_view relative_path);

struct IndexOptions {
    /// fnmatch patterns matched against repo-relative paths of files and directories.
    std::vector<std::string> exclude_globs;
    /// 0 picks the hardware concurrency.
    unsigned threads = 0;
    /// Fixed timestamp for reproducible output; current UTC time when empty.
    std::optional<std::string> created_at;
    /// Receives one line per skipped file.
    std::function<void(const std::string&)> on_skip;
};

RepoIndex index_repository(const std::filesystem::path& root, Language language,
                           const IndexOptions& options = {});

/// Sorted repo-relative paths of the files `index_repository` would parse.
std::vector<std::string> candidate_files(const std::filesystem::path& root, Language language,
                                         const std::vector<std::string>& exclude_globs);

}  // namespace lancekit
