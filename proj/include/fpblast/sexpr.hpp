// S-expression reader and printer with source positions.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fpblast/bitvec.hpp"

namespace fpblast::sexpr {

struct Position {
  int line = 1;
  int column = 1;
};

class ParseError : public Error {
 public:
  ParseError(Position pos, const std::string& what)
      : Error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + what), pos_(pos) {}
  Position position() const { return pos_; }

 private:
  Position pos_;
};

struct SExpr {
  enum class Type { Atom, String, List };
  Type type = Type::Atom;
  std::string text;  // atom text or decoded string contents
  std::vector<SExpr> items;
  Position pos;

  bool is_atom() const { return type == Type::Atom; }
  bool is_atom(std::string_view s) const { return type == Type::Atom && text == s; }
  bool is_string() const { return type == Type::String; }
  bool is_list() const { return type == Type::List; }
  std::size_t size() const { return items.size(); }
  const SExpr& operator[](std::size_t i) const { return items.at(i); }

  friend bool operator==(const SExpr& a, const SExpr& b) {
    return a.type == b.type && a.text == b.text && a.items == b.items;
  }
};

namespace detail {

class Reader {
 public:
  explicit Reader(std::string_view src) : src_(src) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    while (true) {
      skip_space();
      if (at_end()) return out;
      out.push_back(read());
    }
  }

 private:
  bool at_end() const { return i_ >= src_.size(); }
  char peek() const { return src_[i_]; }

  char advance() {
    const char c = src_[i_++];
    if (c == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    return c;
  }

  void skip_space() {
    while (!at_end()) {
      const char c = peek();
      if (c == ';') {
        while (!at_end() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        advance();
      } else {
        return;
      }
    }
  }

  SExpr read() {
    const Position start = pos_;
    const char c = peek();
    if (c == ')') throw ParseError(start, "unexpected ')'");
    if (c == '(') {
      advance();
      SExpr list{SExpr::Type::List, {}, {}, start};
      while (true) {
        skip_space();
        if (at_end()) throw ParseError(start, "unbalanced '(': missing ')'");
        if (peek() == ')') {
          advance();
          return list;
        }
        list.items.push_back(read());
      }
    }
    if (c == '"') {
      advance();
      std::string text;
      while (true) {
        if (at_end()) throw ParseError(start, "unterminated string literal");
        const char d = advance();
        if (d == '"') {
          if (!at_end() && peek() == '"') {
            advance();
            text.push_back('"');
            continue;
          }
          return {SExpr::Type::String, text, {}, start};
        }
        text.push_back(d);
      }
    }
    if (c == '|') {
      advance();
      std::string text;
      while (true) {
        if (at_end()) throw ParseError(start, "unterminated quoted symbol");
        const char d = advance();
        if (d == '|') return {SExpr::Type::Atom, text, {}, start};
        text.push_back(d);
      }
    }
    std::string text;
    while (!at_end()) {
      const char d = peek();
      if (d == '(' || d == ')' || d == ';' || d == '"' || d == ' ' || d == '\t' || d == '\n' || d == '\r') break;
      if (static_cast<unsigned char>(d) < 0x20 || static_cast<unsigned char>(d) >= 0x7f) {
        throw ParseError(pos_, std::string("invalid character 0x") + "0123456789abcdef"[(d >> 4) & 0xf] +
                                   "0123456789abcdef"[d & 0xf]);
      }
      text.push_back(advance());
    }
    return {SExpr::Type::Atom, text, {}, start};
  }

  std::string_view src_;
  std::size_t i_ = 0;
  Position pos_;
};

inline bool plain_symbol(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c == ' ' || c == '(' || c == ')' || c == ';' || c == '"' || c == '|' || c == '\t' || c == '\n') return false;
  }
  return true;
}

}  // namespace detail

inline std::vector<SExpr> parse(std::string_view src) { return detail::Reader(src).read_all(); }

inline std::string to_string(const SExpr& e) {
  switch (e.type) {
    case SExpr::Type::Atom: return detail::plain_symbol(e.text) ? e.text : "|" + e.text + "|";
    case SExpr::Type::String: {
      std::string out = "\"";
      for (char c : e.text) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
      }
      return out + "\"";
    }
    case SExpr::Type::List: {
      std::string out = "(";
      for (std::size_t i = 0; i < e.items.size(); ++i) {
        if (i) out.push_back(' ');
        out += to_string(e.items[i]);
      }
      return out + ")";
    }
  }
  return {};
}

}  // namespace fpblast::sexpr
