#pragma once

// Reader and printer for the s-expression surface syntax of event scripts.
//
// Atoms: symbols (case-folded to lower case), integers, character literals
// (#\A, #\space, #\u<code>), and strings ("..." with \" as the only escape).
// `;` starts a line comment.  `(a . b)` reads as an improper list; a list
// tail that is itself a list is spliced, so `(a . (b c))` reads as `(a b c)`.
// `'x` is shorthand for `(quote x)`.

#include <cctype>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "softk/error.hpp"

namespace softk {

struct SourcePos {
  int line = 0;
  int col = 0;
};

enum class AtomKind { Symbol, Number, Character, String };

struct Form {
  enum class Kind { Atom, List };

  Kind kind = Kind::List;
  AtomKind atom = AtomKind::Symbol;
  std::string text;      // Symbol or String payload
  long long num = 0;     // Number payload
  char32_t chr = 0;      // Character payload
  std::vector<Form> items;
  bool dotted = false;   // items.back() is the improper tail
  SourcePos pos;

  bool is_atom() const { return kind == Kind::Atom; }
  bool is_symbol() const { return kind == Kind::Atom && atom == AtomKind::Symbol; }
  bool is_symbol(std::string_view s) const { return is_symbol() && text == s; }
  bool is_keyword() const { return is_symbol() && !text.empty() && text[0] == ':'; }
  bool is_number() const { return kind == Kind::Atom && atom == AtomKind::Number; }
  bool is_string() const { return kind == Kind::Atom && atom == AtomKind::String; }
  bool is_character() const { return kind == Kind::Atom && atom == AtomKind::Character; }
  bool is_list() const { return kind == Kind::List; }
  bool is_proper_list() const { return kind == Kind::List && !dotted; }
  // (a . b): exactly one element before the dot, an atomic tail after it
  bool is_pair() const { return kind == Kind::List && dotted && items.size() == 2; }

  static Form symbol(std::string s, SourcePos p = {}) {
    Form f;
    f.kind = Kind::Atom;
    f.atom = AtomKind::Symbol;
    f.text = std::move(s);
    f.pos = p;
    return f;
  }
  static Form number(long long n, SourcePos p = {}) {
    Form f;
    f.kind = Kind::Atom;
    f.atom = AtomKind::Number;
    f.num = n;
    f.pos = p;
    return f;
  }
  static Form character(char32_t c, SourcePos p = {}) {
    Form f;
    f.kind = Kind::Atom;
    f.atom = AtomKind::Character;
    f.chr = c;
    f.pos = p;
    return f;
  }
  static Form string(std::string s, SourcePos p = {}) {
    Form f;
    f.kind = Kind::Atom;
    f.atom = AtomKind::String;
    f.text = std::move(s);
    f.pos = p;
    return f;
  }
  static Form list(std::vector<Form> xs, SourcePos p = {}) {
    Form f;
    f.items = std::move(xs);
    f.pos = p;
    return f;
  }
};

inline bool structurally_equal(const Form& a, const Form& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Form::Kind::Atom) {
    if (a.atom != b.atom) return false;
    switch (a.atom) {
      case AtomKind::Symbol:
      case AtomKind::String: return a.text == b.text;
      case AtomKind::Number: return a.num == b.num;
      case AtomKind::Character: return a.chr == b.chr;
    }
    return false;
  }
  if (a.dotted != b.dotted || a.items.size() != b.items.size()) return false;
  for (size_t i = 0; i < a.items.size(); ++i)
    if (!structurally_equal(a.items[i], b.items[i])) return false;
  return true;
}

namespace detail {

inline bool symbol_char(char c) {
  if (std::isalnum(static_cast<unsigned char>(c))) return true;
  return std::strchr("?[]_-+*<>=!:", c) != nullptr;
}

class Reader {
 public:
  explicit Reader(std::string_view src) : src_(src) {}

  std::vector<Form> read_all() {
    std::vector<Form> out;
    for (;;) {
      skip_blank();
      if (at_end()) break;
      out.push_back(read_form());
    }
    return out;
  }

 private:
  static constexpr int kMaxNesting = 2000;

  std::string_view src_;
  size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
  int depth_ = 0;

  bool at_end() const { return i_ >= src_.size(); }
  char peek() const { return src_[i_]; }

  char advance() {
    char c = src_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  SourcePos here() const { return {line_, col_}; }

  [[noreturn]] void err(const std::string& msg, SourcePos p) {
    fail(ErrorCode::Syntax, msg + " at line " + std::to_string(p.line) + ", column " +
                                std::to_string(p.col),
         p.line, p.col);
  }

  void skip_blank() {
    while (!at_end()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == ';') {
        while (!at_end() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  Form read_form() {
    skip_blank();
    SourcePos p = here();
    if (at_end()) err("unexpected end of input", p);
    char c = peek();
    if (c == '(') {
      advance();
      return read_list(p);
    }
    if (c == ')') err("unbalanced ')'", p);
    if (c == '\'') {
      advance();
      Form inner = read_form();
      return Form::list({Form::symbol("quote", p), std::move(inner)}, p);
    }
    if (c == '"') return read_string(p);
    if (c == '#') return read_character(p);
    return read_atom(p);
  }

  Form read_list(SourcePos open) {
    if (++depth_ > kMaxNesting) err("form nested too deeply", open);
    std::vector<Form> items;
    bool dotted = false;
    for (;;) {
      skip_blank();
      if (at_end()) err("unbalanced '('", open);
      char c = peek();
      if (c == ')') {
        advance();
        break;
      }
      if (c == '.' && is_dot_token()) {
        SourcePos dp = here();
        advance();
        if (items.empty()) err("nothing before '.'", dp);
        skip_blank();
        if (at_end() || peek() == ')') err("nothing after '.'", dp);
        Form tail = read_form();
        skip_blank();
        if (at_end() || peek() != ')') err("exactly one form must follow '.'", dp);
        advance();
        if (tail.is_list()) {
          // cons onto a list tail: splice
          dotted = tail.dotted;
          for (auto& t : tail.items) items.push_back(std::move(t));
        } else {
          items.push_back(std::move(tail));
          dotted = true;
        }
        break;
      }
      items.push_back(read_form());
    }
    --depth_;
    Form f = Form::list(std::move(items), open);
    f.dotted = dotted;
    return f;
  }

  bool is_dot_token() const {
    // '.' only delimits a pair when it stands alone
    if (i_ + 1 >= src_.size()) return true;
    char next = src_[i_ + 1];
    return std::isspace(static_cast<unsigned char>(next)) || next == '(' || next == ')' ||
           next == ';';
  }

  Form read_string(SourcePos p) {
    advance();  // opening quote
    std::string out;
    for (;;) {
      if (at_end()) err("unterminated string", p);
      char c = advance();
      if (c == '"') break;
      if (c == '\\' && !at_end() && peek() == '"') {
        out.push_back(advance());
        continue;
      }
      out.push_back(c);
    }
    return Form::string(std::move(out), p);
  }

  Form read_character(SourcePos p) {
    advance();  // '#'
    if (at_end() || peek() != '\\') err("expected '\\' after '#'", p);
    advance();
    if (at_end()) err("unterminated character literal", p);
    char first = advance();
    std::string name(1, first);
    if (std::isalnum(static_cast<unsigned char>(first))) {
      while (!at_end() && symbol_char(peek())) name.push_back(advance());
    }
    if (name.size() == 1) return Form::character(static_cast<unsigned char>(name[0]), p);
    std::string folded = name;
    for (auto& ch : folded) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (folded == "space") return Form::character(' ', p);
    if (folded == "newline") return Form::character('\n', p);
    if (folded == "tab") return Form::character('\t', p);
    if (folded == "nul") return Form::character(0, p);
    if (folded[0] == 'u' && folded.size() > 1 &&
        folded.find_first_not_of("0123456789", 1) == std::string::npos) {
      try {
        return Form::character(static_cast<char32_t>(std::stoul(folded.substr(1))), p);
      } catch (const std::exception&) {
        err("character code out of range '#\\" + name + "'", p);
      }
    }
    err("unknown character name '#\\" + name + "'", p);
  }

  Form read_atom(SourcePos p) {
    std::string tok;
    while (!at_end() && symbol_char(peek())) tok.push_back(advance());
    if (tok.empty()) err(std::string("illegal character '") + peek() + "'", p);
    bool numeric = std::isdigit(static_cast<unsigned char>(tok[0])) ||
                   (tok[0] == '-' && tok.size() > 1 &&
                    std::isdigit(static_cast<unsigned char>(tok[1])));
    if (numeric) {
      if (tok.find_first_not_of("0123456789", tok[0] == '-' ? 1 : 0) != std::string::npos)
        err("illegal atom '" + tok + "'", p);
      try {
        return Form::number(std::stoll(tok), p);
      } catch (const std::exception&) {
        err("numeral out of range '" + tok + "'", p);
      }
    }
    for (auto& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return Form::symbol(std::move(tok), p);
  }
};

inline void write_character(std::string& out, char32_t c) {
  out += "#\\";
  if (c == ' ') {
    out += "space";
  } else if (c == '\n') {
    out += "newline";
  } else if (c == '\t') {
    out += "tab";
  } else if (c >= 33 && c <= 126) {
    out.push_back(static_cast<char>(c));
  } else {
    out.push_back('u');
    out += std::to_string(static_cast<unsigned long>(c));
  }
}

}  // namespace detail

inline std::vector<Form> read_forms(std::string_view text) {
  return detail::Reader(text).read_all();
}

inline Form read_one_form(std::string_view text) {
  auto forms = read_forms(text);
  if (forms.size() != 1) fail(ErrorCode::Syntax, "expected exactly one form");
  return forms.front();
}

inline void write_form(std::string& out, const Form& f) {
  if (f.kind == Form::Kind::Atom) {
    switch (f.atom) {
      case AtomKind::Symbol:
        out += f.text;
        return;
      case AtomKind::Number:
        out += std::to_string(f.num);
        return;
      case AtomKind::Character:
        detail::write_character(out, f.chr);
        return;
      case AtomKind::String: {
        out.push_back('"');
        for (char c : f.text) {
          if (c == '"') out += "\\\"";
          else out.push_back(c);
        }
        out.push_back('"');
        return;
      }
    }
  }
  out.push_back('(');
  for (size_t i = 0; i < f.items.size(); ++i) {
    if (i > 0) out.push_back(' ');
    if (f.dotted && i + 1 == f.items.size()) out += ". ";
    write_form(out, f.items[i]);
  }
  out.push_back(')');
}

inline std::string write_form(const Form& f) {
  std::string out;
  write_form(out, f);
  return out;
}

}  // namespace softk
