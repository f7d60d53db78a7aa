#include "atgforge/prover/expr.hpp"

#include <cctype>
#include <functional>

namespace atgforge::mock {

ExprPtr num(std::uint64_t v) {
  auto e = std::make_shared<Expr>();
  e->op = Op::num;
  e->value = v;
  return e;
}

ExprPtr var(std::string name) {
  auto e = std::make_shared<Expr>();
  e->op = Op::var;
  e->name = std::move(name);
  return e;
}

ExprPtr binary(Op op, ExprPtr lhs, ExprPtr rhs) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->args = {std::move(lhs), std::move(rhs)};
  return e;
}

ExprPtr unary(Op op, ExprPtr operand, std::string name) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->name = std::move(name);
  e->args = {std::move(operand)};
  return e;
}

ExprPtr sum_range(std::string binder, ExprPtr bound, ExprPtr body) {
  auto e = std::make_shared<Expr>();
  e->op = Op::sum_range;
  e->name = std::move(binder);
  e->args = {std::move(bound), std::move(body)};
  return e;
}

ExprPtr sum_ico(std::string binder, ExprPtr lo, ExprPtr hi, ExprPtr body) {
  auto e = std::make_shared<Expr>();
  e->op = Op::sum_ico;
  e->name = std::move(binder);
  e->args = {std::move(lo), std::move(hi), std::move(body)};
  return e;
}

ExprPtr with_args(const Expr& e, std::vector<ExprPtr> args) {
  auto out = std::make_shared<Expr>(e);
  out->args = std::move(args);
  return out;
}

bool is_binary(Op op) { return op == Op::add || op == Op::sub || op == Op::mul || op == Op::div; }
bool is_sum(Op op) { return op == Op::sum_range || op == Op::sum_ico; }
bool is_pattern_var(const Expr& e) { return e.op == Op::var && !e.name.empty() && e.name[0] == '?'; }

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { num, ident, lparen, rparen, plus, minus, star, slash, eq, comma, colon, sum, in, up, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

std::uint32_t decode_utf8(std::string_view s, std::size_t& i) {
  unsigned char c = static_cast<unsigned char>(s[i]);
  int len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
  if (len == 0 || i + len > s.size()) throw ParseError("invalid UTF-8 at byte " + std::to_string(i));
  std::uint32_t cp = len == 1 ? c : len == 2 ? (c & 0x1F) : len == 3 ? (c & 0x0F) : (c & 0x07);
  for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
  i += len;
  return cp;
}

std::optional<Tok> symbol_token(std::uint32_t cp) {
  switch (cp) {
    case 0x2211: return Tok::sum;    // ∑
    case 0x2208: return Tok::in;     // ∈
    case 0x2212: return Tok::minus;  // −
    case 0x2191: return Tok::up;     // ↑
    case 0x00B7: return Tok::star;   // ·
    case 0x00D7: return Tok::star;   // ×
    default: return std::nullopt;
  }
}

bool is_ident_ascii(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '.' || c == '?'; }

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    std::size_t start = i;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      out.push_back({Tok::num, std::string(s.substr(start, i - start)), start});
      continue;
    }
    switch (c) {
      case '(': out.push_back({Tok::lparen, "(", i++}); continue;
      case ')': out.push_back({Tok::rparen, ")", i++}); continue;
      case '+': out.push_back({Tok::plus, "+", i++}); continue;
      case '-': out.push_back({Tok::minus, "-", i++}); continue;
      case '*': out.push_back({Tok::star, "*", i++}); continue;
      case '/': out.push_back({Tok::slash, "/", i++}); continue;
      case '=': out.push_back({Tok::eq, "=", i++}); continue;
      case ',': out.push_back({Tok::comma, ",", i++}); continue;
      case ':': out.push_back({Tok::colon, ":", i++}); continue;
      default: break;
    }
    if (static_cast<unsigned char>(c) < 0x80 && !is_ident_ascii(c)) {
      throw ParseError("unexpected character '" + std::string(1, c) + "' at byte " + std::to_string(i));
    }
    // Identifier: ASCII identifier characters plus any non-operator code point.
    std::size_t j = i;
    while (j < s.size()) {
      unsigned char b = static_cast<unsigned char>(s[j]);
      if (b < 0x80) {
        if (!is_ident_ascii(static_cast<char>(b))) break;
        ++j;
        continue;
      }
      std::size_t k = j;
      std::uint32_t cp = decode_utf8(s, k);
      if (symbol_token(cp)) break;
      j = k;
    }
    if (j == i) {
      std::size_t k = i;
      std::uint32_t cp = decode_utf8(s, k);
      out.push_back({*symbol_token(cp), std::string(s.substr(i, k - i)), i});
      i = k;
      continue;
    }
    std::string word(s.substr(i, j - i));
    out.push_back({word == "in" ? Tok::in : Tok::ident, word, i});
    i = j;
  }
  out.push_back({Tok::end, "", s.size()});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

constexpr int kAddPrec = 65;
constexpr int kMulPrec = 70;
constexpr int kNegPrec = 75;

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  ExprPtr parse_full_expr() {
    ExprPtr e = expr(0);
    expect(Tok::end, "end of input");
    return e;
  }

  Equation parse_full_equation() {
    ExprPtr lhs = expr(0);
    expect(Tok::eq, "'='");
    ExprPtr rhs = expr(0);
    expect(Tok::end, "end of input");
    return {lhs, rhs};
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    throw ParseError("expected " + what + " but found " + (t.kind == Tok::end ? std::string("end of input") : "'" + t.text + "'") +
                     " at byte " + std::to_string(t.offset));
  }

  void expect(Tok kind, const std::string& what) {
    if (peek().kind != kind) fail(what);
    ++pos_;
  }

  static bool starts_app_arg(Tok k) { return k == Tok::num || k == Tok::ident || k == Tok::lparen; }

  static int infix_prec(Tok k) {
    switch (k) {
      case Tok::plus:
      case Tok::minus: return kAddPrec;
      case Tok::star:
      case Tok::slash: return kMulPrec;
      default: return -1;
    }
  }

  static Op infix_op(Tok k) {
    switch (k) {
      case Tok::plus: return Op::add;
      case Tok::minus: return Op::sub;
      case Tok::star: return Op::mul;
      default: return Op::div;
    }
  }

  ExprPtr expr(int min_prec) {
    ExprPtr lhs = prefix();
    for (;;) {
      int prec = infix_prec(peek().kind);
      if (prec < 0 || prec < min_prec) break;
      Op op = infix_op(next().kind);
      ExprPtr rhs = expr(prec + 1);
      lhs = binary(op, lhs, rhs);
    }
    return lhs;
  }

  ExprPtr prefix() {
    const Token& t = peek();
    if (t.kind == Tok::minus) {
      ++pos_;
      return unary(Op::neg, expr(kNegPrec));
    }
    if (t.kind == Tok::sum) return sum();
    if (t.kind == Tok::ident && !is_keyword(t.text) && starts_app_arg(toks_[pos_ + 1].kind)) {
      std::string fn = next().text;
      return unary(Op::app, atom(), fn);
    }
    return atom();
  }

  static bool is_keyword(const std::string& s) {
    return s == "range" || s == "Ico" || s == "Finset.range" || s == "Finset.Ico";
  }

  ExprPtr atom() {
    ExprPtr e;
    Token t = next();
    switch (t.kind) {
      case Tok::num: {
        std::uint64_t v = 0;
        for (char c : t.text) {
          std::uint64_t d = static_cast<std::uint64_t>(c - '0');
          if (v > (UINT64_MAX - d) / 10) throw ParseError("numeral too large at byte " + std::to_string(t.offset));
          v = v * 10 + d;
        }
        e = num(v);
        break;
      }
      case Tok::ident:
        if (is_keyword(t.text)) {
          --pos_;
          fail("a term");
        }
        e = var(t.text);
        break;
      case Tok::up: e = unary(Op::coe, atom()); break;
      case Tok::lparen: {
        ExprPtr inner = expr(0);
        if (peek().kind == Tok::colon) {
          ++pos_;
          if (peek().kind != Tok::ident) fail("a type name");
          inner = unary(Op::ascribe, inner, next().text);
        }
        expect(Tok::rparen, "')'");
        e = inner;
        break;
      }
      default:
        --pos_;
        fail("a term");
    }
    while (peek().kind == Tok::up) {
      ++pos_;
      e = unary(Op::coe, e);
    }
    return e;
  }

  ExprPtr sum() {
    expect(Tok::sum, "'∑'");
    if (peek().kind != Tok::ident || is_keyword(peek().text)) fail("a binder name");
    std::string binder = next().text;
    expect(Tok::in, "'in'");
    if (peek().kind != Tok::ident) fail("'range' or 'Ico'");
    std::string former = next().text;
    if (former == "range" || former == "Finset.range") {
      ExprPtr bound = atom();
      expect(Tok::comma, "','");
      return sum_range(binder, bound, expr(kMulPrec));
    }
    if (former == "Ico" || former == "Finset.Ico") {
      ExprPtr lo = atom();
      ExprPtr hi = atom();
      expect(Tok::comma, "','");
      return sum_ico(binder, lo, hi, expr(kMulPrec));
    }
    --pos_;
    fail("'range' or 'Ico'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printer

int op_prec(Op op) {
  switch (op) {
    case Op::add:
    case Op::sub: return kAddPrec;
    case Op::mul:
    case Op::div: return kMulPrec;
    default: return 100;
  }
}

const char* op_symbol(Op op) {
  switch (op) {
    case Op::add: return " + ";
    case Op::sub: return " - ";
    case Op::mul: return " * ";
    default: return " / ";
  }
}

void print_to(std::string& out, const ExprPtr& e, int ctx_prec, int next_prec);

void print_atom(std::string& out, const ExprPtr& e) {
  switch (e->op) {
    case Op::num:
    case Op::var:
    case Op::ascribe:
    case Op::coe: print_to(out, e, 100, 0); return;
    default:
      out += '(';
      print_to(out, e, 0, 0);
      out += ')';
  }
}

// `next_prec` is the precedence of the operator printed right after `e`
// (0 when nothing follows); a sum body extends over operators of
// multiplicative strength, so a sum followed by one needs parentheses.
void print_to(std::string& out, const ExprPtr& e, int ctx_prec, int next_prec) {
  switch (e->op) {
    case Op::num: out += std::to_string(e->value); return;
    case Op::var: out += e->name; return;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div: {
      int p = op_prec(e->op);
      bool parens = p < ctx_prec;
      if (parens) out += '(';
      print_to(out, e->args[0], p, p);
      out += op_symbol(e->op);
      print_to(out, e->args[1], p + 1, parens ? 0 : next_prec);
      if (parens) out += ')';
      return;
    }
    case Op::neg: {
      bool parens = kNegPrec < ctx_prec;
      if (parens) out += '(';
      out += '-';
      print_to(out, e->args[0], kNegPrec, parens ? 0 : next_prec);
      if (parens) out += ')';
      return;
    }
    case Op::app: {
      bool parens = ctx_prec > 100;
      if (parens) out += '(';
      out += e->name;
      out += ' ';
      print_atom(out, e->args[0]);
      if (parens) out += ')';
      return;
    }
    case Op::coe:
      print_atom(out, e->args[0]);
      out += "↑";
      return;
    case Op::ascribe:
      out += '(';
      print_to(out, e->args[0], 0, 0);
      out += " : ";
      out += e->name;
      out += ')';
      return;
    case Op::sum_range:
    case Op::sum_ico: {
      bool parens = next_prec >= kMulPrec || ctx_prec > 100;
      if (parens) out += '(';
      out += "∑ ";
      out += e->name;
      if (e->op == Op::sum_range) {
        out += " in range ";
        print_atom(out, e->args[0]);
      } else {
        out += " in Ico ";
        print_atom(out, e->args[0]);
        out += ' ';
        print_atom(out, e->args[1]);
      }
      out += ", ";
      print_to(out, e->args.back(), kMulPrec, parens ? 0 : next_prec);
      if (parens) out += ')';
      return;
    }
  }
}

bool alpha_eq(const ExprPtr& a, const ExprPtr& b, std::vector<std::pair<std::string, std::string>>& binders) {
  if (a.get() == b.get() && binders.empty()) return true;
  if (a->op != b->op || a->args.size() != b->args.size()) return false;
  switch (a->op) {
    case Op::num: return a->value == b->value;
    case Op::var: {
      for (auto it = binders.rbegin(); it != binders.rend(); ++it) {
        bool la = it->first == a->name, lb = it->second == b->name;
        if (la || lb) return la && lb;
      }
      return a->name == b->name;
    }
    case Op::app:
    case Op::ascribe:
      if (a->name != b->name) return false;
      break;
    default: break;
  }
  if (is_sum(a->op)) {
    std::size_t n = a->args.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!alpha_eq(a->args[i], b->args[i], binders)) return false;
    }
    binders.emplace_back(a->name, b->name);
    bool ok = alpha_eq(a->args.back(), b->args.back(), binders);
    binders.pop_back();
    return ok;
  }
  for (std::size_t i = 0; i < a->args.size(); ++i) {
    if (!alpha_eq(a->args[i], b->args[i], binders)) return false;
  }
  return true;
}

void collect_free(const ExprPtr& e, std::set<std::string>& bound, std::set<std::string>& out) {
  if (e->op == Op::var) {
    if (!bound.contains(e->name)) out.insert(e->name);
    return;
  }
  if (is_sum(e->op)) {
    for (std::size_t i = 0; i + 1 < e->args.size(); ++i) collect_free(e->args[i], bound, out);
    bool inserted = bound.insert(e->name).second;
    collect_free(e->args.back(), bound, out);
    if (inserted) bound.erase(e->name);
    return;
  }
  for (const auto& a : e->args) collect_free(a, bound, out);
}

void collect_names(const ExprPtr& e, std::set<std::string>& out) {
  if (e->op == Op::var || is_sum(e->op)) out.insert(e->name);
  for (const auto& a : e->args) collect_names(a, out);
}

bool checked_add(std::uint64_t a, std::uint64_t b, std::uint64_t& out) { return !__builtin_add_overflow(a, b, &out); }
bool checked_mul(std::uint64_t a, std::uint64_t b, std::uint64_t& out) { return !__builtin_mul_overflow(a, b, &out); }

constexpr std::uint64_t kMaxUnfold = 10000;

std::optional<std::uint64_t> eval(const ExprPtr& e, std::map<std::string, std::uint64_t>& env) {
  switch (e->op) {
    case Op::num: return e->value;
    case Op::var: {
      auto it = env.find(e->name);
      if (it == env.end()) return std::nullopt;
      return it->second;
    }
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div: {
      auto l = eval(e->args[0], env);
      auto r = eval(e->args[1], env);
      if (!l || !r) return std::nullopt;
      std::uint64_t out = 0;
      switch (e->op) {
        case Op::add: return checked_add(*l, *r, out) ? std::optional(out) : std::nullopt;
        case Op::mul: return checked_mul(*l, *r, out) ? std::optional(out) : std::nullopt;
        case Op::sub: return *l >= *r ? *l - *r : 0;
        default: return *r == 0 ? 0 : *l / *r;
      }
    }
    case Op::sum_range:
    case Op::sum_ico: {
      std::uint64_t lo = 0;
      std::optional<std::uint64_t> hi;
      if (e->op == Op::sum_range) {
        hi = eval(e->args[0], env);
      } else {
        auto l = eval(e->args[0], env);
        if (!l) return std::nullopt;
        lo = *l;
        hi = eval(e->args[1], env);
      }
      if (!hi) return std::nullopt;
      if (*hi > lo && *hi - lo > kMaxUnfold) return std::nullopt;
      auto saved = env.find(e->name) != env.end() ? std::optional(env[e->name]) : std::nullopt;
      std::uint64_t total = 0;
      std::optional<std::uint64_t> result = 0;
      for (std::uint64_t k = lo; k < *hi; ++k) {
        env[e->name] = k;
        auto v = eval(e->args.back(), env);
        if (!v || !checked_add(total, *v, total)) {
          result = std::nullopt;
          break;
        }
      }
      if (saved) {
        env[e->name] = *saved;
      } else {
        env.erase(e->name);
      }
      if (!result) return std::nullopt;
      return total;
    }
    default: return std::nullopt;
  }
}

std::optional<std::string> elab_check(const ExprPtr& e, bool under_ascription) {
  if (e->op == Op::ascribe) return elab_check(e->args[0], true);
  if (!under_ascription) {
    if (e->op == Op::neg) return std::string("failed to synthesize Neg ℕ; numerals are polymorphic, add a type ascription");
    if (e->op == Op::coe) {
      return std::string("typeclass instance problem is stuck, it is often due to metavariables: coercion target type unknown");
    }
  }
  for (const auto& a : e->args) {
    if (auto m = elab_check(a, under_ascription)) return m;
  }
  return std::nullopt;
}

}  // namespace

ExprPtr parse_expr(std::string_view text) { return Parser(text).parse_full_expr(); }
Equation parse_equation(std::string_view text) { return Parser(text).parse_full_equation(); }

std::string print(const ExprPtr& e) {
  std::string out;
  print_to(out, e, 0, 0);
  return out;
}

std::string print(const Equation& eq) {
  std::string out;
  print_to(out, eq.lhs, 0, 50);
  out += " = ";
  print_to(out, eq.rhs, 0, 0);
  return out;
}

bool alpha_equal(const ExprPtr& a, const ExprPtr& b) {
  std::vector<std::pair<std::string, std::string>> binders;
  return alpha_eq(a, b, binders);
}

bool alpha_equal(const Equation& a, const Equation& b) { return alpha_equal(a.lhs, b.lhs) && alpha_equal(a.rhs, b.rhs); }

std::set<std::string> free_vars(const ExprPtr& e) {
  std::set<std::string> bound, out;
  collect_free(e, bound, out);
  return out;
}

bool contains_op(const ExprPtr& e, Op op) {
  if (e->op == op) return true;
  for (const auto& a : e->args) {
    if (contains_op(a, op)) return true;
  }
  return false;
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  if (!avoid.contains(base)) return base;
  for (int i = 1;; ++i) {
    std::string cand = base + "_" + std::to_string(i);
    if (!avoid.contains(cand)) return cand;
  }
}

ExprPtr substitute(const ExprPtr& e, const std::string& name, const ExprPtr& replacement) {
  if (e->op == Op::var) return e->name == name ? replacement : e;
  if (e->args.empty()) return e;
  if (is_sum(e->op)) {
    std::vector<ExprPtr> args;
    for (std::size_t i = 0; i + 1 < e->args.size(); ++i) args.push_back(substitute(e->args[i], name, replacement));
    if (e->name == name) {
      args.push_back(e->args.back());
      return with_args(*e, std::move(args));
    }
    std::set<std::string> repl_free = free_vars(replacement);
    ExprPtr body = e->args.back();
    auto out = std::make_shared<Expr>(*e);
    if (repl_free.contains(e->name)) {
      std::set<std::string> avoid = repl_free;
      collect_names(body, avoid);
      avoid.insert(name);
      std::string fresh = fresh_name(e->name, avoid);
      body = substitute(body, e->name, var(fresh));
      out->name = fresh;
    }
    args.push_back(substitute(body, name, replacement));
    out->args = std::move(args);
    return out;
  }
  std::vector<ExprPtr> args;
  args.reserve(e->args.size());
  bool changed = false;
  for (const auto& a : e->args) {
    args.push_back(substitute(a, name, replacement));
    changed = changed || args.back() != a;
  }
  return changed ? with_args(*e, std::move(args)) : e;
}

std::optional<std::uint64_t> evaluate_ground(const ExprPtr& e) {
  std::map<std::string, std::uint64_t> env;
  return eval(e, env);
}

std::optional<std::string> elaboration_error(const ExprPtr& e) { return elab_check(e, false); }

}  // namespace atgforge::mock
