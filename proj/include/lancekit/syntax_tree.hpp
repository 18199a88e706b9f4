#pragma once

#include "lancekit/repo_model.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lancekit {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct SyntaxNode {
    std::string_view kind;   // grammar node type, e.g. "function_definition"
    std::string_view field;  // field name under the parent, empty when unnamed
    ByteSpan span;
    NodeId parent = kNoNode;
    std::vector<NodeId> children;
    bool named = false;
    bool error = false;    // ERROR node
    bool missing = false;  // inserted by error recovery
};

/// Owned, language-agnostic syntax tree. Node 0 is the root; nodes are stored
/// in pre-order so a node's descendants follow it contiguously.
class SyntaxTree {
public:
    /// Parses `source` with the grammar for `language`. Never throws on bad
    /// syntax; check `has_error()`.
    static SyntaxTree parse(std::string source, Language language);

    Language language() const noexcept { return language_; }
    const std::string& source() const noexcept { return source_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    NodeId root() const noexcept { return 0; }
    const SyntaxNode& node(NodeId id) const { return nodes_.at(id); }
    std::string_view text(NodeId id) const;

    /// True when error recovery produced ERROR or MISSING nodes anywhere.
    bool has_error() const noexcept { return has_error_; }

    NodeId child_by_field(NodeId id, std::string_view field) const;
    std::vector<NodeId> children_by_field(NodeId id, std::string_view field) const;
    NodeId first_child_of_kind(NodeId id, std::string_view kind) const;
    std::vector<NodeId> named_children(NodeId id) const;

private:
    SyntaxTree() = default;

    Language language_ = Language::Python;
    std::string source_;
    std::vector<SyntaxNode> nodes_;
    bool has_error_ = false;
};

}  // namespace lancekit
