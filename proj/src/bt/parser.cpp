#include "tpo/bt/parser.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace tpo::bt {

namespace {

enum class Tok { Word, String, LParen, RParen, LBrace, RBrace, Comma, Equals, End };

struct Token {
  Tok type;
  std::string text;
  int line;
  int col;
};

bool is_word_char(char c) {
  return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' && c != '{' && c != '}' &&
         c != ',' && c != '=' && c != '"' && c != '#';
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    skip_space();
    const int line = line_, col = col_;
    if (pos_ >= text_.size()) return {Tok::End, "end of input", line, col};
    const char c = text_[pos_];
    auto single = [&](Tok t) {
      advance();
      return Token{t, std::string(1, c), line, col};
    };
    switch (c) {
      case '(':
        return single(Tok::LParen);
      case ')':
        return single(Tok::RParen);
      case '{':
        return single(Tok::LBrace);
      case '}':
        return single(Tok::RBrace);
      case ',':
        return single(Tok::Comma);
      case '=':
        return single(Tok::Equals);
      case '"':
        return string_literal(line, col);
      default:
        break;
    }
    std::string word;
    while (pos_ < text_.size() && is_word_char(text_[pos_])) {
      word.push_back(text_[pos_]);
      advance();
    }
    return {Tok::Word, word, line, col};
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  Token string_literal(int line, int col) {
    advance();
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) advance();
      out.push_back(text_[pos_]);
      advance();
    }
    if (pos_ >= text_.size()) throw ParseError(std::to_string(line) + ":" + std::to_string(col) + ": unterminated string");
    advance();
    return {Tok::String, out, line, col};
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lexer_(text) { cur_ = lexer_.next(); }

  BtNode document() {
    BtNode root = node();
    if (cur_.type != Tok::End) fail(cur_, "unexpected '" + cur_.text + "' after the root node");
    root.validate();
    return root;
  }

 private:
  [[noreturn]] static void fail(const Token& at, const std::string& msg) {
    throw ParseError(std::to_string(at.line) + ":" + std::to_string(at.col) + ": " + msg);
  }

  Token take() {
    Token t = cur_;
    cur_ = lexer_.next();
    return t;
  }

  Token expect(Tok type, const char* what) {
    if (cur_.type != type) fail(cur_, std::string("expected ") + what + ", got '" + cur_.text + "'");
    return take();
  }

  BtNode node() {
    const Token kind_tok = expect(Tok::Word, "a node kind");
    const auto kind = kind_from_string(kind_tok.text);
    if (!kind) fail(kind_tok, "unknown node kind '" + kind_tok.text + "'");
    BtNode n;
    n.kind = *kind;
    if (cur_.type == Tok::Word) {
      if (kind_from_string(cur_.text)) fail(cur_, "node name '" + cur_.text + "' is a reserved kind; children go inside '{ }'");
      n.name = take().text;
    }
    if (cur_.type == Tok::LParen) {
      take();
      if (cur_.type != Tok::RParen) {
        argument(n);
        while (cur_.type == Tok::Comma) {
          take();
          argument(n);
        }
      }
      expect(Tok::RParen, "')'");
    }
    if (cur_.type == Tok::LBrace) {
      const Token brace = take();
      if (n.is_leaf()) fail(brace, std::string(to_string(n.kind)) + " nodes cannot have children");
      while (cur_.type != Tok::RBrace) {
        if (cur_.type == Tok::End) fail(cur_, "missing '}'");
        n.children.push_back(node());
      }
      take();
    }
    return n;
  }

  std::string value() {
    if (cur_.type != Tok::Word && cur_.type != Tok::String) fail(cur_, "expected a value, got '" + cur_.text + "'");
    return take().text;
  }

  void argument(BtNode& n) {
    const Token first = cur_;
    const std::string v = value();
    if (cur_.type != Tok::Equals) {
      positional(n, first, v);
      return;
    }
    if (first.type != Tok::Word) fail(first, "parameter keys must be bare identifiers");
    take();
    const std::string rhs = value();
    if (v == "_while") {
      n.pre_while = rhs;
    } else if (v == "_onSuccess") {
      n.post_on_success = rhs;
    } else if (n.kind == NodeKind::Parallel && v == "M") {
      n.threshold = threshold(first, rhs);
    } else if (n.is_leaf()) {
      if (n.params.has(v)) fail(first, "duplicate parameter '" + v + "'");
      n.params.set(v, rhs);
    } else {
      fail(first, std::string(to_string(n.kind)) + " nodes take no parameter '" + v + "'");
    }
  }

  void positional(BtNode& n, const Token& at, const std::string& v) {
    if (n.is_leaf() && n.leaf_id.empty()) {
      n.leaf_id = v;
    } else if (n.kind == NodeKind::Parallel && n.threshold == 0) {
      n.threshold = threshold(at, v);
    } else {
      fail(at, "unexpected positional argument '" + v + "'");
    }
  }

  static int threshold(const Token& at, const std::string& v) {
    double m = 0.0;
    try {
      m = parse_number(v);
    } catch (const ParseError&) {
      fail(at, "parallel threshold must be an integer, got '" + v + "'");
    }
    if (m != static_cast<int>(m)) fail(at, "parallel threshold must be an integer, got '" + v + "'");
    return static_cast<int>(m);
  }

  Lexer lexer_;
  Token cur_;
};

std::string quote(const std::string& v) {
  bool bare = !v.empty();
  for (char c : v) bare = bare && is_word_char(c);
  if (bare) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write(std::ostringstream& os, const BtNode& n, int depth) {
  os << std::string(static_cast<std::size_t>(depth) * 2, ' ') << to_string(n.kind);
  if (!n.name.empty()) os << ' ' << n.name;
  std::vector<std::string> args;
  if (n.is_leaf()) args.push_back(quote(n.leaf_id));
  if (n.kind == NodeKind::Parallel) args.push_back(std::to_string(n.threshold));
  for (const auto& [k, v] : n.params.entries()) args.push_back(k + " = " + quote(v));
  if (!n.pre_while.empty()) args.push_back("_while = " + quote(n.pre_while));
  if (!n.post_on_success.empty()) args.push_back("_onSuccess = " + quote(n.post_on_success));
  if (!args.empty()) {
    os << '(';
    for (std::size_t i = 0; i < args.size(); ++i) os << (i ? ", " : "") << args[i];
    os << ')';
  }
  if (!n.children.empty()) {
    os << " {\n";
    for (const auto& c : n.children) write(os, c, depth + 1);
    os << std::string(static_cast<std::size_t>(depth) * 2, ' ') << "}";
  }
  os << '\n';
}

}  // namespace

BtNode parse_tree(const std::string& text) { return Parser(text).document(); }

BtNode load_tree(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open tree file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_tree(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ":" + e.what());
  }
}

std::string serialize_tree(const BtNode& tree) {
  std::ostringstream os;
  write(os, tree, 0);
  return os.str();
}

}  // namespace tpo::bt
