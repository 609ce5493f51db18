#pragma once

#include <string>

#include "tpo/bt/node.hpp"

namespace tpo::bt {

/// Parses one tree document (see docs/tree_grammar.md). Throws ParseError with
/// line:column on malformed input, unknown node kinds or trailing garbage.
BtNode parse_tree(const std::string& text);
BtNode load_tree(const std::string& path);

/// Canonical text form; parse_tree(serialize_tree(t)) == t.
std::string serialize_tree(const BtNode& tree);

}  // namespace tpo::bt
