#include "lancekit/extractor.hpp"

#include "lancekit/errors.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace lancekit {

namespace fs = std::filesystem;

namespace {

LanguageAdapter make_python_adapter() {
    using R = ParameterRule;
    LanguageAdapter a{.language = Language::Python};
    a.roles = {{"function_definition", NodeRole::Function},
               {"class_definition", NodeRole::Class},
               {"import_statement", NodeRole::Import},
               {"import_from_statement", NodeRole::Import},
               {"decorated_definition", NodeRole::Decorated}};
    a.parameters = {{"identifier", {R::Name::WholeText, R::Type::None}},
                    {"typed_parameter", {R::Name::FirstNamedChild, R::Type::Field}},
                    {"default_parameter", {R::Name::Field, R::Type::None}},
                    {"typed_default_parameter", {R::Name::Field, R::Type::Field}},
                    {"list_splat_pattern", {R::Name::WholeText, R::Type::None}},
                    {"dictionary_splat_pattern", {R::Name::WholeText, R::Type::None}}};
    a.comment_kinds = {"comment"};
    a.supertype_fields = {"superclasses"};
    a.parameters_field = "parameters";
    a.return_type_field = "return_type";
    a.body_field = "body";
    a.default_visibility = Visibility::Unspecified;
    a.doc_style = DocStyle::LeadingBodyString;
    a.receiver_parameters = {"self", "cls"};
    a.file_is_module = true;
    return a;
}

LanguageAdapter make_java_adapter() {
    using R = ParameterRule;
    LanguageAdapter a{.language = Language::Java};
    a.roles = {{"method_declaration", NodeRole::Function},
               {"constructor_declaration", NodeRole::Constructor},
               {"compact_constructor_declaration", NodeRole::Constructor},
               {"class_declaration", NodeRole::Class},
               {"interface_declaration", NodeRole::Class},
               {"enum_declaration", NodeRole::Class},
               {"record_declaration", NodeRole::Class},
               {"annotation_type_declaration", NodeRole::Class},
               {"import_declaration", NodeRole::Import},
               {"package_declaration", NodeRole::Package}};
    a.parameters = {{"formal_parameter", {R::Name::Field, R::Type::Field}},
                    {"spread_parameter", {R::Name::DeclaratorChild, R::Type::FirstNamedChildSpread}}};
    a.visibility_keywords = {{"public", Visibility::Public},
                             {"private", Visibility::Private},
                             {"protected", Visibility::Protected}};
    a.comment_kinds = {"block_comment", "line_comment", "comment"};
    a.interface_kinds = {"interface_declaration", "annotation_type_declaration"};
    a.supertype_fields = {"superclass", "interfaces", "extends_interfaces"};
    a.parameters_field = "parameters";
    a.return_type_field = "type";
    a.body_field = "body";
    a.modifiers_kind = "modifiers";
    a.dimensions_field = "dimensions";
    a.default_visibility = Visibility::Package;
    a.doc_style = DocStyle::PrecedingCommentBlock;
    a.file_is_module = false;
    return a;
}

bool contains(const std::vector<std::string_view>& list, std::string_view item) {
    return std::find(list.begin(), list.end(), item) != list.end();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (true) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    return lines;
}

std::string join_trimmed(const std::vector<std::string>& lines) {
    std::size_t first = 0;
    std::size_t last = lines.size();
    while (first < last && trim(lines[first]).empty()) ++first;
    while (last > first && trim(lines[last - 1]).empty()) --last;
    std::string out;
    for (std::size_t i = first; i < last; ++i) {
        if (i > first) out += '\n';
        std::string_view line = lines[i];
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
        out += line;
    }
    return out;
}

// Body of a Python string literal with the common indentation removed.
std::string clean_python_string(std::string_view literal) {
    while (!literal.empty() && std::isalpha(static_cast<unsigned char>(literal.front()))) {
        literal.remove_prefix(1);
    }
    std::size_t quote = (literal.starts_with("\"\"\"") || literal.starts_with("'''")) ? 3 : 1;
    if (literal.size() >= 2 * quote) literal = literal.substr(quote, literal.size() - 2 * quote);

    auto lines = split_lines(literal);
    std::size_t indent = std::string::npos;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        if (trim(line).empty()) continue;
        std::size_t n = line.find_first_not_of(" \t");
        indent = std::min(indent, n);
    }
    if (!lines.empty()) lines[0] = std::string(trim(lines[0]));
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (indent != std::string::npos && lines[i].size() >= indent) lines[i].erase(0, indent);
        else lines[i] = std::string(trim(lines[i]));
    }
    return join_trimmed(lines);
}

std::string clean_comment(std::string_view text) {
    if (text.starts_with("//")) {
        text.remove_prefix(2);
        if (text.starts_with(' ')) text.remove_prefix(1);
        return std::string(trim(text));
    }
    if (text.starts_with("/*")) {
        text.remove_prefix(text.starts_with("/**") ? 3 : 2);
        if (text.ends_with("*/")) text.remove_suffix(2);
    } else if (text.starts_with('#')) {
        text.remove_prefix(1);
    }
    auto lines = split_lines(text);
    for (std::string& line : lines) {
        std::string_view view = trim(line);
        if (view.starts_with('*')) {
            view.remove_prefix(1);
            if (view.starts_with(' ')) view.remove_prefix(1);
        }
        line = std::string(view);
    }
    return join_trimmed(lines);
}

struct ParsedDoc {
    std::optional<std::string> description;
    std::vector<std::pair<std::string, std::string>> parameters;
};

// Splits a cleaned doc comment into its description and `@param name text` or
// `:param name: text` tags.
ParsedDoc parse_doc(const std::string& doc) {
    ParsedDoc parsed;
    std::vector<std::string> description;
    bool in_tags = false;
    std::pair<std::string, std::string>* open_param = nullptr;
    for (const std::string& raw : split_lines(doc)) {
        std::string_view line = trim(raw);
        if (line.starts_with("@param ")) {
            in_tags = true;
            std::string_view rest = trim(line.substr(7));
            std::size_t sp = rest.find_first_of(" \t");
            std::string name(rest.substr(0, sp));
            std::string text = sp == std::string_view::npos ? "" : std::string(trim(rest.substr(sp)));
            parsed.parameters.emplace_back(name, text);
            open_param = &parsed.parameters.back();
        } else if (line.starts_with(":param ")) {
            in_tags = true;
            std::string_view rest = line.substr(7);
            std::size_t colon = rest.find(':');
            std::string_view head = trim(rest.substr(0, colon));
            std::size_t sp = head.find_last_of(" \t");
            std::string name(sp == std::string_view::npos ? head : head.substr(sp + 1));
            std::string text = colon == std::string_view::npos ? "" : std::string(trim(rest.substr(colon + 1)));
            parsed.parameters.emplace_back(name, text);
            open_param = &parsed.parameters.back();
        } else if (line.starts_with('@') || (line.starts_with(':') && line.find(':', 1) != std::string_view::npos)) {
            in_tags = true;
            open_param = nullptr;
        } else if (in_tags) {
            if (line.empty()) {
                open_param = nullptr;
            } else if (open_param) {
                if (!open_param->second.empty()) open_param->second += ' ';
                open_param->second += line;
            }
        } else {
            description.push_back(raw);
        }
    }
    std::string text = join_trimmed(description);
    if (!text.empty()) parsed.description = std::move(text);
    return parsed;
}

std::string package_of_module(const std::string& module, bool is_package_init) {
    if (is_package_init) return module;
    std::size_t dot = module.rfind('.');
    return dot == std::string::npos ? std::string() : module.substr(0, dot);
}

class Walker {
public:
    Walker(const SyntaxTree& tree, std::string_view file)
        : tree_(tree), adapter_(adapter_for(tree.language())), file_(file) {}

    FileExtraction run() {
        if (adapter_.file_is_module) {
            module_ = python_module_name(file_);
            EntityRecord module{.name = module_, .kind = EntityKind::Module, .file = file_};
            module.comment = leading_string(tree_.root());
            out_.entities.push_back(std::move(module));
            scopes_.push_back(Scope{Scope::Entity, 0, module_, false});
        }
        visit(tree_.root());
        std::stable_sort(out_.functions.begin(), out_.functions.end(),
                         [](const ApiFunction& a, const ApiFunction& b) { return a.span.start < b.span.start; });
        return std::move(out_);
    }

private:
    struct Scope {
        enum Kind { Entity, Function } kind;
        std::size_t entity_index;
        std::string qualified;
        bool interface;
    };

    void visit(NodeId id) {
        ++out_.nodes_visited;
        const SyntaxNode& node = tree_.node(id);
        if (node.error || node.missing) {
            ++error_depth_;
            visit_children(id);
            --error_depth_;
            return;
        }
        auto role = adapter_.roles.find(node.kind);
        if (error_depth_ > 0 || role == adapter_.roles.end()) {
            visit_children(id);
            return;
        }
        switch (role->second) {
            case NodeRole::Package:
                for (NodeId child : tree_.named_children(id)) {
                    if (!contains(adapter_.comment_kinds, tree_.node(child).kind)) {
                        package_ = std::string(tree_.text(child));
                        break;
                    }
                }
                visit_children(id);
                break;
            case NodeRole::Import:
                decode_import(id);
                visit_children(id);
                break;
            case NodeRole::Class:
                scopes_.push_back(open_class(id));
                visit_children(id);
                scopes_.pop_back();
                break;
            case NodeRole::Function:
                emit_function(id);
                scopes_.push_back(Scope{Scope::Function, 0, {}, false});
                visit_children(id);
                scopes_.pop_back();
                break;
            case NodeRole::Constructor:
                scopes_.push_back(Scope{Scope::Function, 0, {}, false});
                visit_children(id);
                scopes_.pop_back();
                break;
            case NodeRole::Decorated:
                visit_children(id);
                break;
        }
    }

    void visit_children(NodeId id) {
        for (NodeId child : tree_.node(id).children) visit(child);
    }

    const Scope* innermost_entity() const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            if (it->kind == Scope::Entity) return &*it;
        }
        return nullptr;
    }

    bool inside_function() const {
        return std::any_of(scopes_.begin(), scopes_.end(),
                           [](const Scope& s) { return s.kind == Scope::Function; });
    }

    std::string qualify(std::string_view name) const {
        std::string prefix = innermost_entity() ? innermost_entity()->qualified : package_;
        return prefix.empty() ? std::string(name) : prefix + "." + std::string(name);
    }

    Scope open_class(NodeId id) {
        EntityRecord entity;
        NodeId name = tree_.child_by_field(id, "name");
        entity.name = qualify(name == kNoNode ? "<anonymous>" : tree_.text(name));
        entity.kind = EntityKind::Class;
        entity.file = file_;
        for (std::string_view field : adapter_.supertype_fields) {
            NodeId holder = tree_.child_by_field(id, field);
            if (holder == kNoNode) holder = tree_.first_child_of_kind(id, field);
            if (holder != kNoNode) collect_supertypes(holder, entity.supertypes);
        }
        std::optional<std::string> doc = documentation(id);
        if (doc) entity.comment = parse_doc(*doc).description;
        out_.entities.push_back(std::move(entity));
        return Scope{Scope::Entity, out_.entities.size() - 1, out_.entities.back().name,
                     contains(adapter_.interface_kinds, tree_.node(id).kind)};
    }

    void collect_supertypes(NodeId holder, std::vector<std::string>& out) const {
        for (NodeId child : tree_.named_children(holder)) {
            std::string_view kind = tree_.node(child).kind;
            if (contains(adapter_.comment_kinds, kind) || kind == "keyword_argument") continue;
            if (kind == "type_list" || kind == "argument_list") {
                collect_supertypes(child, out);
            } else {
                out.emplace_back(tree_.text(child));
            }
        }
    }

    void emit_function(NodeId id) {
        NodeId name = tree_.child_by_field(id, "name");
        if (name == kNoNode) return;

        ApiFunction fn;
        fn.name = std::string(tree_.text(name));
        fn.file = file_;
        fn.span = tree_.node(id).span;
        const Scope* owner = innermost_entity();
        if (owner) fn.owner = owner->qualified;

        const bool nested = inside_function();
        fn.visibility = nested ? Visibility::Private : declared_visibility(id, owner);

        if (NodeId params = tree_.child_by_field(id, adapter_.parameters_field); params != kNoNode) {
            for (NodeId child : tree_.node(params).children) {
                auto rule = adapter_.parameters.find(tree_.node(child).kind);
                if (rule == adapter_.parameters.end()) continue;
                if (auto p = read_parameter(child, rule->second)) fn.parameters.push_back(std::move(*p));
            }
        }
        const bool is_method = owner && !nested && out_.entities[owner->entity_index].kind == EntityKind::Class;
        if (is_method && !fn.parameters.empty() && !fn.parameters.front().declared_type &&
            contains(adapter_.receiver_parameters, fn.parameters.front().name)) {
            fn.parameters.erase(fn.parameters.begin());
        }

        if (NodeId ret = tree_.child_by_field(id, adapter_.return_type_field); ret != kNoNode) {
            std::string type(tree_.text(ret));
            if (!adapter_.dimensions_field.empty()) {
                if (NodeId dims = tree_.child_by_field(id, adapter_.dimensions_field); dims != kNoNode) {
                    type += tree_.text(dims);
                }
            }
            fn.return_type = std::move(type);
        }

        if (std::optional<std::string> doc = documentation(id)) {
            ParsedDoc parsed = parse_doc(*doc);
            fn.comment = parsed.description;
            for (auto& [pname, ptext] : parsed.parameters) {
                for (Parameter& p : fn.parameters) {
                    std::string_view bare = p.name;
                    while (bare.starts_with('*')) bare.remove_prefix(1);
                    if (bare == pname && !ptext.empty()) p.comment = ptext;
                }
            }
        }

        if (owner) out_.entities[owner->entity_index].methods.push_back(fn.span.start);
        out_.functions.push_back(std::move(fn));
    }

    Visibility declared_visibility(NodeId id, const Scope* owner) const {
        if (!adapter_.modifiers_kind.empty()) {
            if (NodeId mods = tree_.first_child_of_kind(id, adapter_.modifiers_kind); mods != kNoNode) {
                for (NodeId m : tree_.node(mods).children) {
                    auto hit = adapter_.visibility_keywords.find(tree_.node(m).kind);
                    if (hit != adapter_.visibility_keywords.end()) return hit->second;
                }
            }
        }
        if (owner && owner->interface) return Visibility::Public;
        return adapter_.default_visibility;
    }

    std::optional<Parameter> read_parameter(NodeId id, const ParameterRule& rule) const {
        Parameter p;
        NodeId name_node = kNoNode;
        switch (rule.name) {
            case ParameterRule::Name::WholeText:
                p.name = std::string(tree_.text(id));
                break;
            case ParameterRule::Name::Field:
                name_node = tree_.child_by_field(id, "name");
                break;
            case ParameterRule::Name::FirstNamedChild: {
                auto named = tree_.named_children(id);
                if (!named.empty()) name_node = named.front();
                break;
            }
            case ParameterRule::Name::DeclaratorChild:
                if (NodeId decl = tree_.first_child_of_kind(id, "variable_declarator"); decl != kNoNode) {
                    name_node = tree_.child_by_field(decl, "name");
                }
                break;
        }
        if (name_node != kNoNode) p.name = std::string(tree_.text(name_node));
        if (p.name.empty()) return std::nullopt;

        switch (rule.type) {
            case ParameterRule::Type::None:
                break;
            case ParameterRule::Type::Field:
                if (NodeId t = tree_.child_by_field(id, "type"); t != kNoNode) {
                    std::string type(tree_.text(t));
                    if (!adapter_.dimensions_field.empty()) {
                        if (NodeId dims = tree_.child_by_field(id, adapter_.dimensions_field); dims != kNoNode) {
                            type += tree_.text(dims);
                        }
                    }
                    p.declared_type = std::move(type);
                }
                break;
            case ParameterRule::Type::FirstNamedChildSpread:
                for (NodeId child : tree_.named_children(id)) {
                    std::string_view kind = tree_.node(child).kind;
                    if (kind == adapter_.modifiers_kind || kind == "variable_declarator") continue;
                    p.declared_type = std::string(tree_.text(child)) + "...";
                    break;
                }
                break;
        }
        return p;
    }

    std::optional<std::string> documentation(NodeId id) const {
        if (adapter_.doc_style == DocStyle::LeadingBodyString) {
            NodeId body = tree_.child_by_field(id, adapter_.body_field);
            return body == kNoNode ? std::nullopt : leading_string(body);
        }
        return preceding_comments(id);
    }

    std::optional<std::string> leading_string(NodeId block) const {
        for (NodeId child : tree_.named_children(block)) {
            std::string_view kind = tree_.node(child).kind;
            if (contains(adapter_.comment_kinds, kind)) continue;
            if (kind != "expression_statement") return std::nullopt;
            auto inner = tree_.named_children(child);
            if (inner.size() != 1 || tree_.node(inner.front()).kind != "string") return std::nullopt;
            std::string doc = clean_python_string(tree_.text(inner.front()));
            if (doc.empty()) return std::nullopt;
            return doc;
        }
        return std::nullopt;
    }

    // Nearest run of comments directly above `id` with no blank line in between.
    std::optional<std::string> preceding_comments(NodeId id) const {
        const SyntaxNode& node = tree_.node(id);
        if (node.parent == kNoNode) return std::nullopt;
        const auto& siblings = tree_.node(node.parent).children;
        auto pos = std::find(siblings.begin(), siblings.end(), id);
        std::vector<NodeId> block;
        std::size_t boundary = node.span.start;
        const std::string& src = tree_.source();
        while (pos != siblings.begin()) {
            NodeId prev = *--pos;
            const SyntaxNode& p = tree_.node(prev);
            if (!contains(adapter_.comment_kinds, p.kind)) break;
            std::string_view gap = std::string_view(src).substr(p.span.end, boundary - p.span.end);
            if (!trim(gap).empty() || std::count(gap.begin(), gap.end(), '\n') > 1) break;
            block.push_back(prev);
            boundary = p.span.start;
        }
        if (block.empty()) return std::nullopt;
        std::reverse(block.begin(), block.end());
        std::vector<std::string> parts;
        for (NodeId c : block) parts.push_back(clean_comment(tree_.text(c)));
        std::string joined = join_trimmed(parts);
        if (joined.empty()) return std::nullopt;
        return joined;
    }

    void decode_import(NodeId id) {
        if (adapter_.language == Language::Python) {
            decode_python_import(id);
        } else {
            decode_java_import(id);
        }
    }

    void add_import(std::string local, std::string target, ImportKind kind, bool relative) {
        out_.imports.push_back(ImportBinding{std::move(local), std::move(target), kind, file_, relative, false});
    }

    void decode_python_import(NodeId id) {
        const SyntaxNode& node = tree_.node(id);
        if (node.kind == "import_statement") {
            for (NodeId name : tree_.children_by_field(id, "name")) {
                if (tree_.node(name).kind == "aliased_import") {
                    NodeId target = tree_.child_by_field(name, "name");
                    NodeId alias = tree_.child_by_field(name, "alias");
                    if (target == kNoNode || alias == kNoNode) continue;
                    add_import(std::string(tree_.text(alias)), std::string(tree_.text(target)),
                               ImportKind::ModuleAlias, false);
                } else {
                    std::string dotted(tree_.text(name));
                    add_import(dotted, dotted, ImportKind::ModuleAlias, false);
                }
            }
            return;
        }

        NodeId module = tree_.child_by_field(id, "module_name");
        if (module == kNoNode) return;
        std::string base;
        bool relative = false;
        if (tree_.node(module).kind == "relative_import") {
            relative = true;
            std::size_t levels = 0;
            std::string rest;
            for (NodeId child : tree_.node(module).children) {
                if (tree_.node(child).kind == "import_prefix") {
                    auto prefix = tree_.text(child);
                    levels = static_cast<std::size_t>(std::count(prefix.begin(), prefix.end(), '.'));
                } else if (tree_.node(child).kind == "dotted_name") {
                    rest = std::string(tree_.text(child));
                }
            }
            std::string package = package_of_module(module_, file_.ends_with("__init__.py"));
            for (std::size_t i = 1; i < levels && !package.empty(); ++i) {
                std::size_t dot = package.rfind('.');
                package = dot == std::string::npos ? std::string() : package.substr(0, dot);
            }
            base = package;
            if (!rest.empty()) base = base.empty() ? rest : base + "." + rest;
        } else {
            base = std::string(tree_.text(module));
        }
        auto join = [&](std::string_view name) {
            return base.empty() ? std::string(name) : base + "." + std::string(name);
        };

        if (tree_.first_child_of_kind(id, "wildcard_import") != kNoNode) {
            add_import({}, base, ImportKind::Wildcard, relative);
        }
        for (NodeId name : tree_.children_by_field(id, "name")) {
            if (tree_.node(name).kind == "aliased_import") {
                NodeId target = tree_.child_by_field(name, "name");
                NodeId alias = tree_.child_by_field(name, "alias");
                if (target == kNoNode || alias == kNoNode) continue;
                add_import(std::string(tree_.text(alias)), join(tree_.text(target)),
                           ImportKind::EntityImport, relative);
            } else {
                std::string_view text = tree_.text(name);
                add_import(std::string(text), join(text), ImportKind::EntityImport, relative);
            }
        }
    }

    void decode_java_import(NodeId id) {
        std::string path;
        bool wildcard = false;
        for (NodeId child : tree_.node(id).children) {
            std::string_view kind = tree_.node(child).kind;
            if (kind == "scoped_identifier" || kind == "identifier") path = std::string(tree_.text(child));
            if (kind == "asterisk") wildcard = true;
        }
        if (path.empty()) return;
        if (wildcard) {
            add_import({}, path, ImportKind::Wildcard, false);
            return;
        }
        std::size_t dot = path.rfind('.');
        std::string local = dot == std::string::npos ? path : path.substr(dot + 1);
        add_import(std::move(local), std::move(path), ImportKind::EntityImport, false);
    }

    const SyntaxTree& tree_;
    const LanguageAdapter& adapter_;
    std::string file_;
    std::string module_;
    std::string package_;
    std::vector<Scope> scopes_;
    int error_depth_ = 0;
    FileExtraction out_;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

bool excluded(const std::string& relative, const std::vector<std::string>& globs) {
    return std::any_of(globs.begin(), globs.end(), [&](const std::string& glob) {
        return fnmatch(glob.c_str(), relative.c_str(), 0) == 0;
    });
}

void mark_external_imports(RepoIndex& index) {
    std::set<std::string, std::less<>> modules;
    std::set<std::string, std::less<>> known;
    for (const EntityRecord& e : index.entities) {
        known.insert(e.name);
        if (e.kind == EntityKind::Module) modules.insert(e.name);
    }
    for (const ApiFunction& f : index.functions) known.insert(f.qualified_name());

    for (auto& [file, bindings] : index.imports_by_file) {
        for (ImportBinding& b : bindings) {
            switch (b.kind) {
                case ImportKind::ModuleAlias:
                    // Java has no module entities; a resolvable class counts.
                    b.external = !(modules.count(b.target) || known.count(b.target));
                    break;
                case ImportKind::EntityImport:
                    b.external = !known.count(b.target);
                    break;
                case ImportKind::Wildcard: {
                    const std::string prefix = b.target + ".";
                    b.external = !std::any_of(known.begin(), known.end(), [&](const std::string& name) {
                        return name == b.target || name.starts_with(prefix);
                    });
                    break;
                }
            }
        }
    }
}

}  // namespace

const LanguageAdapter& adapter_for(Language language) {
    static const LanguageAdapter python = make_python_adapter();
    static const LanguageAdapter java = make_java_adapter();
    return language == Language::Python ? python : java;
}

FileExtraction extract_file(const SyntaxTree& tree, std::string_view file) {
    return Walker(tree, file).run();
}

std::vector<ApiFunction> extract_functions(const SyntaxTree& tree, std::string_view file) {
    return extract_file(tree, file).functions;
}

std::vector<ImportBinding> extract_imports(const SyntaxTree& tree, std::string_view file) {
    return extract_file(tree, file).imports;
}

std::string python_module_name(std::string_view relative_path) {
    std::string path(relative_path);
    if (path.ends_with(".py")) path.resize(path.size() - 3);
    if (path == "__init__") return {};
    if (path.ends_with("/__init__")) path.resize(path.size() - 9);
    std::replace(path.begin(), path.end(), '/', '.');
    return path;
}

std::vector<std::string> candidate_files(const fs::path& root, Language language,
                                         const std::vector<std::string>& exclude_globs) {
    const std::string_view extension = source_extension(language);
    std::vector<std::string> files;
    std::error_code ec;
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw IoError("cannot list " + root.string() + ": " + ec.message());
    for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) throw IoError("cannot list " + root.string() + ": " + ec.message());
        const fs::path& path = it->path();
        const std::string relative = path.lexically_relative(root).generic_string();
        const bool hidden = path.filename().string().starts_with('.');
        if (it->is_directory()) {
            if (hidden || excluded(relative, exclude_globs)) it.disable_recursion_pending();
            continue;
        }
        if (hidden || !it->is_regular_file() || path.extension() != extension) continue;
        if (excluded(relative, exclude_globs)) continue;
        files.push_back(relative);
    }
    std::sort(files.begin(), files.end());
    return files;
}

RepoIndex index_repository(const fs::path& root_in, Language language, const IndexOptions& options) {
    std::error_code ec;
    if (!fs::is_directory(root_in, ec)) throw IoError("repository root not found: " + root_in.string());
    const fs::path root = fs::weakly_canonical(fs::absolute(root_in));

    const std::vector<std::string> files = candidate_files(root, language, options.exclude_globs);
    if (files.empty()) {
        throw EmptyRepoError("no " + std::string(source_extension(language)) + " files under " + root.string());
    }

    struct Outcome {
        std::optional<FileExtraction> extraction;
        std::string error;
    };
    std::vector<Outcome> outcomes(files.size());

    auto work = [&](std::size_t worker, std::size_t stride) {
        for (std::size_t i = worker; i < files.size(); i += stride) {
            try {
                SyntaxTree tree = SyntaxTree::parse(read_file(root / files[i]), language);
                if (tree.has_error()) {
                    outcomes[i].error = "syntax error";
                    continue;
                }
                outcomes[i].extraction = extract_file(tree, files[i]);
            } catch (const std::exception& e) {
                outcomes[i].error = e.what();
            }
        }
    };

    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, files.size()));
    if (threads <= 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    }

    RepoIndex index;
    index.repo_root = root.string();
    index.language = language;
    index.created_at = options.created_at ? *options.created_at : utc_timestamp();
    for (std::size_t i = 0; i < files.size(); ++i) {
        Outcome& outcome = outcomes[i];
        if (!outcome.extraction) {
            index.skipped_files.push_back(files[i]);
            if (options.on_skip) options.on_skip(files[i] + ": " + outcome.error);
            continue;
        }
        FileExtraction& x = *outcome.extraction;
        std::move(x.functions.begin(), x.functions.end(), std::back_inserter(index.functions));
        std::move(x.entities.begin(), x.entities.end(), std::back_inserter(index.entities));
        if (!x.imports.empty()) index.imports_by_file[files[i]] = std::move(x.imports);
    }
    std::stable_sort(index.functions.begin(), index.functions.end(), [](const ApiFunction& a, const ApiFunction& b) {
        return std::tie(a.file, a.span.start) < std::tie(b.file, b.span.start);
    });
    mark_external_imports(index);

    if (auto problems = validate(index); !problems.empty()) {
        throw Error("extractor produced an inconsistent index: " + problems.front());
    }
    return index;
}

}  // namespace lancekit
