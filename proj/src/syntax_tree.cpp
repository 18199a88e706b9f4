#include "lancekit/syntax_tree.hpp"

#include <tree_sitter/api.h>

#include <memory>

extern "C" {
const TSLanguage* tree_sitter_python();
const TSLanguage* tree_sitter_java();
}

namespace lancekit {

namespace {

struct ParserDeleter {
    void operator()(TSParser* p) const { ts_parser_delete(p); }
};
struct TreeDeleter {
    void operator()(TSTree* t) const { ts_tree_delete(t); }
};

const TSLanguage* grammar_for(Language language) {
    return language == Language::Python ? tree_sitter_python() : tree_sitter_java();
}

}  // namespace

SyntaxTree SyntaxTree::parse(std::string source, Language language) {
    SyntaxTree tree;
    tree.language_ = language;
    tree.source_ = std::move(source);

    std::unique_ptr<TSParser, ParserDeleter> parser(ts_parser_new());
    ts_parser_set_language(parser.get(), grammar_for(language));
    std::unique_ptr<TSTree, TreeDeleter> ts_tree(ts_parser_parse_string(
        parser.get(), nullptr, tree.source_.data(), static_cast<uint32_t>(tree.source_.size())));

    if (!ts_tree) {
        tree.has_error_ = true;
        tree.nodes_.push_back(SyntaxNode{"ERROR", {}, {0, tree.source_.size()}, kNoNode, {}, true, true, false});
        return tree;
    }

    TSNode root = ts_tree_root_node(ts_tree.get());
    tree.has_error_ = ts_node_has_error(root);
    tree.nodes_.reserve(ts_node_descendant_count(root));

    TSTreeCursor cursor = ts_tree_cursor_new(root);
    std::vector<NodeId> stack;
    // Pre-order walk; `stack` holds the chain of ancestors of the cursor node.
    while (true) {
        TSNode current = ts_tree_cursor_current_node(&cursor);
        const char* field = ts_tree_cursor_current_field_name(&cursor);
        SyntaxNode node;
        node.kind = ts_node_type(current);
        node.field = field ? std::string_view(field) : std::string_view();
        node.span = {ts_node_start_byte(current), ts_node_end_byte(current)};
        node.parent = stack.empty() ? kNoNode : stack.back();
        node.named = ts_node_is_named(current);
        node.error = ts_node_is_error(current);
        node.missing = ts_node_is_missing(current);
        const auto id = static_cast<NodeId>(tree.nodes_.size());
        if (node.parent != kNoNode) tree.nodes_[node.parent].children.push_back(id);
        tree.nodes_.push_back(std::move(node));

        if (ts_tree_cursor_goto_first_child(&cursor)) {
            stack.push_back(id);
            continue;
        }
        bool advanced = false;
        while (!advanced) {
            if (ts_tree_cursor_goto_next_sibling(&cursor)) {
                advanced = true;
            } else if (ts_tree_cursor_goto_parent(&cursor)) {
                stack.pop_back();
            } else {
                break;
            }
        }
        if (!advanced) break;
    }
    ts_tree_cursor_delete(&cursor);
    return tree;
}

std::string_view SyntaxTree::text(NodeId id) const {
    const ByteSpan& span = nodes_.at(id).span;
    return std::string_view(source_).substr(span.start, span.end - span.start);
}

NodeId SyntaxTree::child_by_field(NodeId id, std::string_view field) const {
    for (NodeId child : nodes_.at(id).children) {
        if (nodes_[child].field == field) return child;
    }
    return kNoNode;
}

std::vector<NodeId> SyntaxTree::children_by_field(NodeId id, std::string_view field) const {
    std::vector<NodeId> out;
    for (NodeId child : nodes_.at(id).children) {
        if (nodes_[child].field == field) out.push_back(child);
    }
    return out;
}

NodeId SyntaxTree::first_child_of_kind(NodeId id, std::string_view kind) const {
    for (NodeId child : nodes_.at(id).children) {
        if (nodes_[child].kind == kind) return child;
    }
    return kNoNode;
}

std::vector<NodeId> SyntaxTree::named_children(NodeId id) const {
    std::vector<NodeId> out;
    for (NodeId child : nodes_.at(id).children) {
        if (nodes_[child].named) out.push_back(child);
    }
    return out;
}

}  // namespace lancekit
