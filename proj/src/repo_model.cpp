#include "lancekit/repo_model.hpp"

#include "lancekit/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace lancekit {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kLanguageNames[] = {"python", "java"};
constexpr std::string_view kVisibilityNames[] = {"public", "private", "protected", "package",
                                                 "unspecified"};
constexpr std::string_view kEntityKindNames[] = {"class", "module"};
constexpr std::string_view kImportKindNames[] = {"module_alias", "entity_import", "wildcard"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::string_view (&names)[N], std::string_view text) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == text) return static_cast<Enum>(i);
    }
    return std::nullopt;
}

Json optional_string(const std::optional<std::string>& value) {
    return value ? Json(*value) : Json(nullptr);
}

}  // namespace

std::string_view to_string(Language language) { return kLanguageNames[static_cast<int>(language)]; }
std::string_view to_string(Visibility v) { return kVisibilityNames[static_cast<int>(v)]; }
std::string_view to_string(EntityKind kind) { return kEntityKindNames[static_cast<int>(kind)]; }
std::string_view to_string(ImportKind kind) { return kImportKindNames[static_cast<int>(kind)]; }

std::optional<Language> parse_language(std::string_view text) {
    return lookup<Language>(kLanguageNames, text);
}
std::optional<Visibility> parse_visibility(std::string_view text) {
    return lookup<Visibility>(kVisibilityNames, text);
}
std::optional<EntityKind> parse_entity_kind(std::string_view text) {
    return lookup<EntityKind>(kEntityKindNames, text);
}
std::optional<ImportKind> parse_import_kind(std::string_view text) {
    return lookup<ImportKind>(kImportKindNames, text);
}

std::string_view source_extension(Language language) {
    return language == Language::Python ? ".py" : ".java";
}

std::string ApiFunction::qualified_name() const {
    return owner ? *owner + "." + name : name;
}

const EntityRecord* RepoIndex::find_entity(std::string_view name) const {
    auto it = std::find_if(entities.begin(), entities.end(),
                           [&](const EntityRecord& e) { return e.name == name; });
    return it == entities.end() ? nullptr : &*it;
}

const ApiFunction* RepoIndex::find_function(std::string_view file, std::size_t span_start) const {
    auto it = std::find_if(functions.begin(), functions.end(), [&](const ApiFunction& f) {
        return f.file == file && f.span.start == span_start;
    });
    return it == functions.end() ? nullptr : &*it;
}

std::vector<const ApiFunction*> RepoIndex::methods_of(const EntityRecord& entity) const {
    std::vector<const ApiFunction*> out;
    out.reserve(entity.methods.size());
    for (std::size_t start : entity.methods) {
        if (const ApiFunction* f = find_function(entity.file, start)) out.push_back(f);
    }
    return out;
}

std::span<const ImportBinding> RepoIndex::imports_for(std::string_view file) const {
    auto it = imports_by_file.find(std::string(file));
    if (it == imports_by_file.end()) return {};
    return it->second;
}

std::vector<const ApiFunction*> RepoIndex::functions_named(std::string_view qualified) const {
    std::vector<const ApiFunction*> out;
    for (const ApiFunction& f : functions) {
        if (f.qualified_name() == qualified) out.push_back(&f);
    }
    return out;
}

std::size_t RepoIndex::import_count() const {
    std::size_t n = 0;
    for (const auto& [file, bindings] : imports_by_file) n += bindings.size();
    return n;
}

std::vector<std::string> validate(const RepoIndex& index) {
    std::vector<std::string> problems;
    std::set<std::pair<std::string, ByteSpan>> keys;
    for (const ApiFunction& f : index.functions) {
        if (f.name.empty()) problems.push_back("function with empty name in " + f.file);
        if (f.span.start >= f.span.end) {
            problems.push_back("function " + f.qualified_name() + " has an empty span");
        }
        if (f.file.empty() || f.file.starts_with('/') || f.file.starts_with("..")) {
            problems.push_back("function " + f.qualified_name() + " lies outside the repository");
        }
        for (const Parameter& p : f.parameters) {
            if (p.name.empty()) problems.push_back(f.qualified_name() + " has an unnamed parameter");
        }
        if (!keys.emplace(f.file, f.span).second) {
            problems.push_back("duplicate function span in " + f.file + " at " +
                               std::to_string(f.span.start));
        }
    }
    for (const EntityRecord& e : index.entities) {
        if (e.kind == EntityKind::Module && !e.supertypes.empty()) {
            problems.push_back("module " + e.name + " has supertypes");
        }
        for (std::size_t start : e.methods) {
            if (!index.find_function(e.file, start)) {
                problems.push_back("entity " + e.name + " references missing method at " +
                                   std::to_string(start));
            }
        }
    }
    for (const auto& [file, bindings] : index.imports_by_file) {
        for (const ImportBinding& b : bindings) {
            if (b.local_name.empty() && b.kind != ImportKind::Wildcard) {
                problems.push_back("import of " + b.target + " in " + file + " has no local name");
            }
        }
    }
    return problems;
}

namespace {

// Source text is not guaranteed to be valid UTF-8.
constexpr auto kReplaceInvalid = Json::error_handler_t::replace;

Json function_record(const ApiFunction& f) {
    Json params = Json::array();
    for (const Parameter& p : f.parameters) {
        params.push_back(Json{{"name", p.name},
                              {"type", optional_string(p.declared_type)},
                              {"comment", optional_string(p.comment)}});
    }
    return Json{{"kind", "function"},
                {"name", f.name},
                {"visibility", to_string(f.visibility)},
                {"params", std::move(params)},
                {"comment", optional_string(f.comment)},
                {"return_type", optional_string(f.return_type)},
                {"owner", optional_string(f.owner)},
                {"file", f.file},
                {"span_start", f.span.start},
                {"span_end", f.span.end}};
}

Json entity_record(const EntityRecord& e) {
    return Json{{"kind", "entity"},
                {"name", e.name},
                {"entity_kind", to_string(e.kind)},
                {"supertypes", e.supertypes},
                {"comment", optional_string(e.comment)},
                {"file", e.file},
                {"methods", e.methods}};
}

Json import_record(const ImportBinding& b) {
    return Json{{"kind", "import"},
                {"local_name", b.local_name},
                {"target", b.target},
                {"import_kind", to_string(b.kind)},
                {"file", b.file},
                {"relative", b.relative},
                {"external", b.external}};
}

// Field access that reports the offending line instead of a json exception.
class RecordReader {
public:
    RecordReader(const Json& record, std::size_t line) : record_(record), line_(line) {}

    const Json& field(const char* name) const {
        auto it = record_.find(name);
        if (it == record_.end()) fail(std::string("missing field '") + name + "'");
        return *it;
    }

    std::string string(const char* name) const {
        const Json& v = field(name);
        if (!v.is_string()) fail(std::string("field '") + name + "' must be a string");
        return v.get<std::string>();
    }

    std::optional<std::string> optional(const char* name) const {
        const Json& v = field(name);
        if (v.is_null()) return std::nullopt;
        if (!v.is_string()) fail(std::string("field '") + name + "' must be a string or null");
        return v.get<std::string>();
    }

    std::size_t count(const char* name) const {
        const Json& v = field(name);
        if (!v.is_number_unsigned()) fail(std::string("field '") + name + "' must be unsigned");
        return v.get<std::size_t>();
    }

    bool flag(const char* name) const {
        const Json& v = field(name);
        if (!v.is_boolean()) fail(std::string("field '") + name + "' must be a boolean");
        return v.get<bool>();
    }

    template <typename Enum>
    Enum enumeration(const char* name, std::optional<Enum> (*parse)(std::string_view)) const {
        auto text = string(name);
        auto value = parse(text);
        if (!value) fail("unknown " + std::string(name) + " '" + text + "'");
        return *value;
    }

    [[noreturn]] void fail(const std::string& message) const { throw SchemaError(line_, message); }

private:
    const Json& record_;
    std::size_t line_;
};

ApiFunction read_function(const RecordReader& r) {
    ApiFunction f;
    f.name = r.string("name");
    f.visibility = r.enumeration<Visibility>("visibility", parse_visibility);
    const Json& params = r.field("params");
    if (!params.is_array()) r.fail("field 'params' must be an array");
    for (const Json& p : params) {
        if (!p.is_object()) r.fail("parameter must be an object");
        RecordReader pr(p, 0);
        Parameter param;
        try {
            param.name = pr.string("name");
            param.declared_type = pr.optional("type");
            param.comment = pr.optional("comment");
        } catch (const SchemaError& e) {
            r.fail(std::string("bad parameter: ") + e.what());
        }
        f.parameters.push_back(std::move(param));
    }
    f.comment = r.optional("comment");
    f.return_type = r.optional("return_type");
    f.owner = r.optional("owner");
    f.file = r.string("file");
    f.span = {r.count("span_start"), r.count("span_end")};
    return f;
}

EntityRecord read_entity(const RecordReader& r) {
    EntityRecord e;
    e.name = r.string("name");
    e.kind = r.enumeration<EntityKind>("entity_kind", parse_entity_kind);
    const Json& supers = r.field("supertypes");
    const Json& methods = r.field("methods");
    if (!supers.is_array() || !methods.is_array()) r.fail("supertypes/methods must be arrays");
    for (const Json& s : supers) {
        if (!s.is_string()) r.fail("supertype must be a string");
        e.supertypes.push_back(s.get<std::string>());
    }
    for (const Json& m : methods) {
        if (!m.is_number_unsigned()) r.fail("method reference must be an offset");
        e.methods.push_back(m.get<std::size_t>());
    }
    e.comment = r.optional("comment");
    e.file = r.string("file");
    return e;
}

ImportBinding read_import(const RecordReader& r) {
    ImportBinding b;
    b.local_name = r.string("local_name");
    b.target = r.string("target");
    b.kind = r.enumeration<ImportKind>("import_kind", parse_import_kind);
    b.file = r.string("file");
    b.relative = r.flag("relative");
    b.external = r.flag("external");
    return b;
}

}  // namespace

std::string serialize_index(const RepoIndex& index) {
    std::ostringstream out;
    Json header{{"kind", "header"},
                {"repo_root", index.repo_root},
                {"language", to_string(index.language)},
                {"schema_version", index.schema_version},
                {"created_at", index.created_at},
                {"record_count", index.functions.size() + index.entities.size() + index.import_count()},
                {"skipped_files", index.skipped_files}};
    out << header.dump(-1, ' ', false, kReplaceInvalid) << '\n';
    for (const ApiFunction& f : index.functions) out << function_record(f).dump(-1, ' ', false, kReplaceInvalid) << '\n';
    for (const EntityRecord& e : index.entities) out << entity_record(e).dump(-1, ' ', false, kReplaceInvalid) << '\n';
    for (const auto& [file, bindings] : index.imports_by_file) {
        for (const ImportBinding& b : bindings) out << import_record(b).dump(-1, ' ', false, kReplaceInvalid) << '\n';
    }
    return out.str();
}

void save_index(const RepoIndex& index, const std::filesystem::path& destination) {
    std::ofstream out(destination, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write index to " + destination.string());
    out << serialize_index(index);
    out.flush();
    if (!out) throw IoError("failed while writing " + destination.string());
}

RepoIndex parse_index(std::string_view text) {
    RepoIndex index;
    std::size_t line_no = 0;
    std::size_t expected_records = 0;
    std::size_t records = 0;
    bool have_header = false;

    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        ++line_no;
        if (line.empty()) continue;

        Json record = Json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw SchemaError(line_no, "malformed record");
        }
        RecordReader r(record, line_no);
        const std::string kind = r.string("kind");

        if (!have_header) {
            if (kind != "header") r.fail("first record must be the header");
            const Json& version = r.field("schema_version");
            if (!version.is_number_integer()) r.fail("schema_version must be an integer");
            index.schema_version = version.get<int>();
            if (index.schema_version > kSchemaVersion || index.schema_version < 1) {
                r.fail("unsupported schema_version " + std::to_string(index.schema_version) +
                       " (this build reads up to " + std::to_string(kSchemaVersion) + ")");
            }
            index.repo_root = r.string("repo_root");
            index.language = r.enumeration<Language>("language", parse_language);
            index.created_at = r.string("created_at");
            expected_records = r.count("record_count");
            const Json& skipped = r.field("skipped_files");
            if (!skipped.is_array()) r.fail("skipped_files must be an array");
            for (const Json& s : skipped) {
                if (!s.is_string()) r.fail("skipped_files entries must be strings");
                index.skipped_files.push_back(s.get<std::string>());
            }
            have_header = true;
            continue;
        }

        if (kind == "function") {
            index.functions.push_back(read_function(r));
        } else if (kind == "entity") {
            index.entities.push_back(read_entity(r));
        } else if (kind == "import") {
            ImportBinding b = read_import(r);
            index.imports_by_file[b.file].push_back(std::move(b));
        } else {
            r.fail("unknown record kind '" + kind + "'");
        }
        ++records;
    }

    if (!have_header) throw SchemaError(line_no + 1, "missing header record");
    if (records != expected_records) {
        throw SchemaError(line_no + 1, "truncated index: header announces " +
                                           std::to_string(expected_records) + " records, found " +
                                           std::to_string(records));
    }
    return index;
}

RepoIndex load_index(const std::filesystem::path& source) {
    std::ifstream in(source, std::ios::binary);
    if (!in) throw IoError("cannot read index " + source.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_index(buffer.str());
}

std::string utc_timestamp() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buffer;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view content, std::size_t offset) {
    offset = std::min(offset, content.size());
    std::size_t line = 1;
    std::size_t line_start = 0;
    for (std::size_t i = 0; i < offset; ++i) {
        if (content[i] == '\n') {
            ++line;
            line_start = i + 1;
        }
    }
    return {line, offset - line_start + 1};
}

}  // namespace lancekit
