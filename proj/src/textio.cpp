#include "irsmith/textio.hpp"

#include <fmt/format.h>

#include <array>
#include <charconv>
#include <cmath>
#include <unordered_map>

#include "irsmith/numeric.hpp"
#include "irsmith/op_schema.hpp"
#include "irsmith/verifier.hpp"

namespace irsmith {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error(fmt::format("line {}, column {}: {}", line, column, message)),
      line_(line),
      column_(column) {}

std::string format_float_literal(std::uint64_t bits, unsigned width) {
  const double value = bits_to_float(bits, width);
  auto hex = [&] { return fmt::format("0x{:0{}X}", bits, width / 4); };
  if (!std::isfinite(value)) return hex();

  std::array<char, 64> buf{};
  std::to_chars_result res;
  if (width == 64) {
    res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  } else {
    res = std::to_chars(buf.data(), buf.data() + buf.size(), static_cast<float>(value));
  }
  std::string text(buf.data(), res.ptr);
  // MLIR float literals need a '.' before any exponent.
  if (text.find('.') == std::string::npos) {
    auto e = text.find('e');
    if (e == std::string::npos) text += ".0";
    else text.insert(e, ".0");
  }
  double reparsed = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), reparsed);
  if (ec != std::errc{} || float_to_bits(reparsed, width) != bits) return hex();
  return text;
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

namespace {

class Printer {
 public:
  Printer(const Module& m, const EmitOptions& o) : m_(m), o_(o) {}

  std::string run() {
    out_ += "module {\n";
    for (const auto& f : m_.functions) function(f);
    out_ += "}\n";
    return std::move(out_);
  }

 private:
  void line(int depth, const std::string& text) {
    out_.append(static_cast<std::size_t>(depth * o_.indent_width), ' ');
    out_ += text;
    out_ += '\n';
  }

  const std::string& define(ValueId v) {
    auto [it, fresh] = names_.emplace(v, std::string());
    if (fresh) it->second = o_.value_prefix + std::to_string(next_++);
    return it->second;
  }

  std::string use(ValueId v) const {
    auto it = names_.find(v);
    return it == names_.end() ? fmt::format("%<undef{}>", v) : it->second;
  }

  std::string uses(const std::vector<ValueId>& vs) const {
    std::string s;
    for (std::size_t i = 0; i < vs.size(); ++i) s += (i ? ", " : "") + use(vs[i]);
    return s;
  }

  std::string type_of(ValueId v) const { return m_.type_of(v).str(); }

  std::string types(const std::vector<ValueId>& vs) const {
    std::string s;
    for (std::size_t i = 0; i < vs.size(); ++i) s += (i ? ", " : "") + type_of(vs[i]);
    return s;
  }

  static std::string type_list(const std::vector<Type>& ts) {
    std::string s;
    for (std::size_t i = 0; i < ts.size(); ++i) s += (i ? ", " : "") + ts[i].str();
    return s;
  }

  // `-> i32`, `-> (i32, f64)`, `-> ()` for function-like signatures.
  static std::string result_sig(const std::vector<Type>& ts) {
    if (ts.size() == 1) return ts[0].str();
    return "(" + type_list(ts) + ")";
  }

  std::string results_prefix(const Operation& op) {
    if (op.results.empty()) return "";
    std::string s;
    for (std::size_t i = 0; i < op.results.size(); ++i) {
      s += (i ? ", " : "") + define(op.results[i]);
    }
    return s + " = ";
  }

  void function(const Operation& f) {
    names_.clear();
    next_ = 0;
    const auto& fty = function_type(f);
    const Block& body = f.regions[0].entry();
    std::string args;
    for (std::size_t i = 0; i < body.arguments.size(); ++i) {
      args += fmt::format("{}{}: {}", i ? ", " : "", define(body.arguments[i]),
                          type_of(body.arguments[i]));
    }
    std::string header = fmt::format("func.func @{}({})", symbol_name(f), args);
    if (!fty.results.empty()) header += " -> " + result_sig(fty.results);
    line(1, header + " {");
    block_ops(body, 2);
    line(1, "}");
  }

  void block_ops(const Block& b, int depth) {
    for (const auto& op : b.ops) operation(op, depth);
  }

  std::string constant_literal(const Operation& op) {
    const Attribute* a = op.attr("value");
    if (const auto* ia = std::get_if<IntegerAttr>(a)) {
      if (ia->type == Type::integer(1)) return ia->value ? "true" : "false";
      return fmt::format("{} : {}", ia->value, ia->type.str());
    }
    const auto& fa = std::get<FloatAttr>(*a);
    return fmt::format("{} : {}", format_float_literal(fa.bits, fa.type.width()),
                       fa.type.str());
  }

  std::string indices(const Operation& op, std::size_t first) {
    std::vector<ValueId> idx(op.operands.begin() + static_cast<std::ptrdiff_t>(first),
                             op.operands.end());
    return "[" + uses(idx) + "]";
  }

  void operation(const Operation& op, int depth) {
    const std::string& name = op.name;
    switch (opcode_kind(op.code)) {
      case OpKind::Constant: {
        std::string lit = constant_literal(op);
        line(depth, results_prefix(op) + "arith.constant " + lit);
        return;
      }
      case OpKind::IntBinary:
      case OpKind::FloatBinary:
      case OpKind::FloatUnary:
      case OpKind::FloatTernary: {
        std::string operands = uses(op.operands);
        line(depth, fmt::format("{}{} {} : {}", results_prefix(op), name, operands,
                                type_of(op.results[0])));
        return;
      }
      case OpKind::CmpI:
      case OpKind::CmpF: {
        std::string operands = uses(op.operands);
        line(depth, fmt::format("{}{} {}, {} : {}", results_prefix(op), name,
                                *op.attr_as<std::string>("predicate"), operands,
                                type_of(op.operands[0])));
        return;
      }
      case OpKind::Select: {
        std::string operands = uses(op.operands);
        line(depth, fmt::format("{}{} {} : {}", results_prefix(op), name, operands,
                                type_of(op.results[0])));
        return;
      }
      case OpKind::IntExt:
      case OpKind::IntTrunc:
      case OpKind::FloatExt:
      case OpKind::FloatTrunc:
      case OpKind::IntToFloat:
      case OpKind::FloatToInt:
      case OpKind::IndexCast:
      case OpKind::Bitcast: {
        std::string operand = use(op.operands[0]);
        line(depth, fmt::format("{}{} {} : {} to {}", results_prefix(op), name, operand,
                                type_of(op.operands[0]), type_of(op.results[0])));
        return;
      }
      case OpKind::Alloc:
      case OpKind::Alloca:
        line(depth, fmt::format("{}{}() : {}", results_prefix(op), name, type_of(op.results[0])));
        return;
      case OpKind::Load: {
        std::string mem = use(op.operands[0]);
        std::string idx = indices(op, 1);
        line(depth, fmt::format("{}{} {}{} : {}", results_prefix(op), name, mem, idx,
                                type_of(op.operands[0])));
        return;
      }
      case OpKind::Store:
        line(depth, fmt::format("{} {}, {}{} : {}", name, use(op.operands[0]),
                                use(op.operands[1]), indices(op, 2), type_of(op.operands[1])));
        return;
      case OpKind::Dealloc:
        line(depth, fmt::format("{} {} : {}", name, use(op.operands[0]), type_of(op.operands[0])));
        return;
      case OpKind::Copy:
        line(depth, fmt::format("{} {}, {} : {} to {}", name, use(op.operands[0]),
                                use(op.operands[1]), type_of(op.operands[0]),
                                type_of(op.operands[1])));
        return;
      case OpKind::Call: {
        std::string operands = uses(op.operands);
        std::vector<Type> in, out;
        for (auto v : op.operands) in.push_back(m_.type_of(v));
        for (auto v : op.results) out.push_back(m_.type_of(v));
        line(depth, fmt::format("{}{} @{}({}) : ({}) -> {}", results_prefix(op), name,
                                *op.attr_as<std::string>("callee"), operands, type_list(in),
                                result_sig(out)));
        return;
      }
      case OpKind::Return:
      case OpKind::Yield:
        if (op.operands.empty()) line(depth, name);
        else line(depth, fmt::format("{} {} : {}", name, uses(op.operands), types(op.operands)));
        return;
      case OpKind::Condition: {
        std::vector<ValueId> forwarded(op.operands.begin() + 1, op.operands.end());
        std::string head = fmt::format("{}({})", name, use(op.operands[0]));
        if (forwarded.empty()) line(depth, head);
        else line(depth, fmt::format("{} {} : {}", head, uses(forwarded), types(forwarded)));
        return;
      }
      case OpKind::If: {
        std::string cond = use(op.operands[0]);
        std::string head = results_prefix(op) + "scf.if " + cond;
        if (!op.results.empty()) head += " -> (" + types(op.results) + ")";
        line(depth, head + " {");
        block_ops(op.regions[0].entry(), depth + 1);
        line(depth, "} else {");
        block_ops(op.regions[1].entry(), depth + 1);
        line(depth, "}");
        return;
      }
      case OpKind::For: {
        std::string bounds = fmt::format("{} to {} step {}", use(op.operands[0]),
                                         use(op.operands[1]), use(op.operands[2]));
        const Block& body = op.regions[0].entry();
        line(depth, fmt::format("scf.for {} = {} {{", define(body.arguments[0]), bounds));
        block_ops(body, depth + 1);
        line(depth, "}");
        return;
      }
      case OpKind::While: {
        std::string prefix = results_prefix(op);
        const Block& before = op.regions[0].entry();
        const Block& after = op.regions[1].entry();
        std::string assigns;
        for (std::size_t i = 0; i < op.operands.size(); ++i) {
          std::string init = use(op.operands[i]);
          assigns += fmt::format("{}{} = {}", i ? ", " : "", define(before.arguments[i]), init);
        }
        std::string head = prefix + "scf.while ";
        if (!op.operands.empty()) head += "(" + assigns + ") ";
        std::vector<Type> out;
        for (auto v : op.results) out.push_back(m_.type_of(v));
        head += fmt::format(": ({}) -> {} {{", types(op.operands), result_sig(out));
        line(depth, head);
        block_ops(before, depth + 1);
        line(depth, "} do {");
        if (!after.arguments.empty()) {
          std::string args;
          for (std::size_t i = 0; i < after.arguments.size(); ++i) {
            args += fmt::format("{}{}: {}", i ? ", " : "", define(after.arguments[i]),
                                type_of(after.arguments[i]));
          }
          line(depth, "^bb0(" + args + "):");
        }
        block_ops(after, depth + 1);
        line(depth, "}");
        return;
      }
      case OpKind::Custom:
      case OpKind::Function: {
        std::string operands = uses(op.operands);
        std::vector<Type> out;
        for (auto v : op.results) out.push_back(m_.type_of(v));
        line(depth, fmt::format("{}\"{}\"({}) : ({}) -> {}", results_prefix(op), name, operands,
                                types(op.operands), result_sig(out)));
        return;
      }
    }
  }

  const Module& m_;
  const EmitOptions& o_;
  std::unordered_map<ValueId, std::string> names_;
  std::size_t next_ = 0;
  std::string out_;
};

}  // namespace

std::string emit_unverified(const Module& module, const EmitOptions& options) {
  if (options.indent_width < 1) throw IRError("indent_width must be at least 1");
  if (options.value_prefix.empty() || options.value_prefix[0] != '%') {
    throw IRError("value_prefix must start with '%'");
  }
  return Printer(module, options).run();
}

std::string emit(const Module& module, const EmitOptions& options) {
  auto report = verify(module);
  if (!report.ok()) throw IRError("refusing to emit an invalid module:\n" + report.str());
  return emit_unverified(module, options);
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace {

enum class Tok {
  End,
  ValueName,  // %foo
  Symbol,     // @foo
  BlockLabel, // ^bb0
  Ident,      // arith.addi, i32, to, step
  Type,       // memref<...>
  Integer,
  Float,
  String,
  Punct,      // ( ) { } [ ] , : = < >
  Arrow,      // ->
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};


class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.column = col_;
    if (pos_ >= src_.size()) return t;
    char c = src_[pos_];
    auto take_while = [&](auto pred) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && pred(src_[pos_])) advance();
      return std::string(src_.substr(start, pos_ - start));
    };
    auto name_char = [](char ch) {
      return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.' ||
             ch == '$' || ch == '#';
    };

    if (c == '%' || c == '@' || c == '^') {
      advance();
      t.kind = c == '%' ? Tok::ValueName : (c == '@' ? Tok::Symbol : Tok::BlockLabel);
      t.text = take_while(name_char);
      if (t.text.empty()) throw ParseError(t.line, t.column, "empty name");
      return t;
    }
    if (c == '"') {
      advance();
      std::size_t start = pos_;
      while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') advance();
      if (pos_ >= src_.size() || src_[pos_] != '"') {
        throw ParseError(t.line, t.column, "unterminated string");
      }
      t.kind = Tok::String;
      t.text = std::string(src_.substr(start, pos_ - start));
      advance();
      return t;
    }
    if (c == '-' && peek(1) == '>') {
      advance();
      advance();
      t.kind = Tok::Arrow;
      t.text = "->";
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      return number(t);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      if (src_.substr(pos_).starts_with("memref<")) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && src_[pos_] != '>' && src_[pos_] != '\n') advance();
        if (pos_ >= src_.size() || src_[pos_] != '>') {
          throw ParseError(t.line, t.column, "unterminated memref type");
        }
        advance();
        t.kind = Tok::Type;
        t.text = std::string(src_.substr(start, pos_ - start));
        return t;
      }
      t.kind = Tok::Ident;
      t.text = take_while([](char ch) {
        return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.' ||
               ch == '$';
      });
      return t;
    }
    static constexpr std::string_view kPunct = "(){}[],:=<>";
    if (kPunct.find(c) != std::string_view::npos) {
      advance();
      t.kind = Tok::Punct;
      t.text = std::string(1, c);
      return t;
    }
    throw ParseError(t.line, t.column, fmt::format("unexpected character '{}'", c));
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token number(Token t) {
    std::size_t start = pos_;
    if (src_[pos_] == '-') advance();
    if (src_[pos_] == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
      advance();
      advance();
      while (pos_ < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[pos_]))) {
        advance();
      }
      t.kind = Tok::Integer;
      t.text = std::string(src_.substr(start, pos_ - start));
      return t;
    }
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        advance();
      }
    };
    digits();
    t.kind = Tok::Integer;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      t.kind = Tok::Float;
      advance();
      digits();
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        advance();
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
        digits();
      }
    }
    t.text = std::string(src_.substr(start, pos_ - start));
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) { tok_ = lex_.next(); }

  Module run() {
    bool wrapped = false;
    if (is_ident("module")) {
      consume();
      expect_punct("{");
      wrapped = true;
    }
    while (true) {
      if (wrapped && is_punct("}")) {
        consume();
        break;
      }
      if (tok_.kind == Tok::End) {
        if (wrapped) error("expected '}' closing the module");
        break;
      }
      function();
    }
    if (tok_.kind != Tok::End) error("trailing input after module");
    return std::move(m_);
  }

 private:
  [[noreturn]] void error(const std::string& msg) const {
    throw ParseError(tok_.line, tok_.column, msg);
  }

  Token consume() {
    Token t = std::move(tok_);
    tok_ = lex_.next();
    return t;
  }

  bool is_punct(std::string_view p) const { return tok_.kind == Tok::Punct && tok_.text == p; }
  bool is_ident(std::string_view s) const { return tok_.kind == Tok::Ident && tok_.text == s; }

  void expect_punct(std::string_view p) {
    if (!is_punct(p)) error(fmt::format("expected '{}'", p));
    consume();
  }

  void expect_ident(std::string_view s) {
    if (!is_ident(s)) error(fmt::format("expected '{}'", s));
    consume();
  }

  void expect_arrow() {
    if (tok_.kind != Tok::Arrow) error("expected '->'");
    consume();
  }

  Type type() {
    if (tok_.kind == Tok::Type || tok_.kind == Tok::Ident) {
      auto t = parse_type(tok_.text);
      if (!t) error(fmt::format("unsupported type '{}'", tok_.text));
      if (!t->well_formed()) error(fmt::format("malformed type '{}'", tok_.text));
      consume();
      return *t;
    }
    error("expected a type");
  }

  std::vector<Type> type_list_until(std::string_view close) {
    std::vector<Type> ts;
    if (is_punct(close)) return ts;
    ts.push_back(type());
    while (is_punct(",")) {
      consume();
      ts.push_back(type());
    }
    return ts;
  }

  // `(t, ...)` or a bare type after `->`.
  std::vector<Type> result_types() {
    if (is_punct("(")) {
      consume();
      auto ts = type_list_until(")");
      expect_punct(")");
      return ts;
    }
    return {type()};
  }

  std::string value_name() {
    if (tok_.kind != Tok::ValueName) error("expected an SSA value name");
    return consume().text;
  }

  ValueId value_use() {
    Token t = tok_;
    std::string name = value_name();
    auto it = names_.find(name);
    if (it == names_.end()) {
      throw ParseError(t.line, t.column, fmt::format("use of undefined value '%{}'", name));
    }
    return it->second;
  }

  std::vector<ValueId> value_uses() {
    std::vector<ValueId> vs;
    if (tok_.kind != Tok::ValueName) return vs;
    vs.push_back(value_use());
    while (is_punct(",")) {
      consume();
      vs.push_back(value_use());
    }
    return vs;
  }

  void bind(const std::string& name, ValueId v, const Token& at) {
    if (!names_.emplace(name, v).second) {
      throw ParseError(at.line, at.column, fmt::format("redefinition of '%{}'", name));
    }
  }

  void function() {
    if (!is_ident("func.func")) {
      if (tok_.kind == Tok::Ident || tok_.kind == Tok::String) {
        error(fmt::format("unsupported op '{}' at module level", tok_.text));
      }
      error("expected 'func.func'");
    }
    consume();
    if (tok_.kind != Tok::Symbol) error("expected a function symbol");
    std::string sym = consume().text;
    names_.clear();
    expect_punct("(");
    std::vector<std::pair<Token, std::string>> arg_names;
    std::vector<Type> params;
    while (!is_punct(")")) {
      Token at = tok_;
      std::string n = value_name();
      expect_punct(":");
      params.push_back(type());
      arg_names.emplace_back(at, n);
      if (!is_punct(",")) break;
      consume();
    }
    expect_punct(")");
    std::vector<Type> results;
    if (tok_.kind == Tok::Arrow) {
      consume();
      results = result_types();
    }
    Operation f = make_function(m_, sym, params, results);
    Block& body = f.regions[0].entry();
    for (std::size_t i = 0; i < arg_names.size(); ++i) {
      bind(arg_names[i].second, body.arguments[i], arg_names[i].first);
    }
    expect_punct("{");
    block_body(body);
    expect_punct("}");
    m_.functions.push_back(std::move(f));
  }

  void block_body(Block& b) {
    while (!is_punct("}")) {
      if (tok_.kind == Tok::End) error("unexpected end of input inside a block");
      b.ops.push_back(operation());
    }
  }

  // Parses `^bb0(%a: t, ...):` into arguments of `b` (types must already match).
  void block_label(Block& b) {
    consume();  // ^label
    std::size_t i = 0;
    if (is_punct("(")) {
      consume();
      while (!is_punct(")")) {
        Token at = tok_;
        std::string n = value_name();
        expect_punct(":");
        Type t = type();
        if (i >= b.arguments.size() || m_.type_of(b.arguments[i]) != t) {
          throw ParseError(at.line, at.column, "block argument does not match the op signature");
        }
        bind(n, b.arguments[i++], at);
        if (!is_punct(",")) break;
        consume();
      }
      expect_punct(")");
    }
    if (i != b.arguments.size()) error("block label lists the wrong number of arguments");
    expect_punct(":");
  }

  Operation operation() {
    std::vector<std::pair<Token, std::string>> result_names;
    if (tok_.kind == Tok::ValueName) {
      while (true) {
        Token at = tok_;
        result_names.emplace_back(at, value_name());
        if (!is_punct(",")) break;
        consume();
      }
      expect_punct("=");
    }
    Token name_tok = tok_;
    Operation op;
    if (tok_.kind == Tok::String) {
      op = generic_op();
    } else if (tok_.kind == Tok::Ident) {
      op = pretty_op();
    } else {
      error("expected an operation");
    }
    if (op.results.size() != result_names.size()) {
      throw ParseError(name_tok.line, name_tok.column,
                       fmt::format("'{}' produces {} results but {} names were given", op.name,
                                   op.results.size(), result_names.size()));
    }
    for (std::size_t i = 0; i < result_names.size(); ++i) {
      bind(result_names[i].second, op.results[i], result_names[i].first);
    }
    return op;
  }

  Operation build(std::string name, std::vector<ValueId> operands, std::vector<Type> results,
                   std::vector<NamedAttribute> attrs = {}, std::vector<Region> regions = {}) {
    OpBuild b;
    b.name = std::move(name);
    b.operands = std::move(operands);
    b.result_types = std::move(results);
    b.attributes = std::move(attrs);
    b.regions = std::move(regions);
    return make_op_unchecked(m_, std::move(b));
  }

  Operation generic_op() {
    Token at = tok_;
    std::string name = consume().text;
    if (!find_custom_schema(name)) {
      throw ParseError(at.line, at.column, fmt::format("unsupported op '{}'", name));
    }
    expect_punct("(");
    auto operands = value_uses();
    expect_punct(")");
    expect_punct(":");
    expect_punct("(");
    auto in = type_list_until(")");
    expect_punct(")");
    expect_arrow();
    auto out = result_types();
    if (in.size() != operands.size()) error("operand type list length mismatch");
    return build(name, operands, out);
  }

  Operation pretty_op() {
    Token at = tok_;
    std::string name = consume().text;
    OpCode code = opcode_for(name);
    if (code == OpCode::Custom || code == OpCode::FuncFunc) {
      throw ParseError(at.line, at.column, fmt::format("unsupported op '{}'", name));
    }
    switch (opcode_kind(code)) {
      case OpKind::Constant:
        return constant(name);
      case OpKind::IntBinary:
      case OpKind::FloatBinary:
      case OpKind::FloatUnary:
      case OpKind::FloatTernary:
      case OpKind::Select: {
        auto operands = value_uses();
        expect_punct(":");
        Type t = type();
        return build(name, operands, {t});
      }
      case OpKind::CmpI:
      case OpKind::CmpF: {
        if (tok_.kind != Tok::Ident) error("expected a comparison predicate");
        std::string pred = consume().text;
        expect_punct(",");
        auto operands = value_uses();
        expect_punct(":");
        type();
        return build(name, operands, {Type::integer(1)}, {{"predicate", pred}});
      }
      case OpKind::IntExt:
      case OpKind::IntTrunc:
      case OpKind::FloatExt:
      case OpKind::FloatTrunc:
      case OpKind::IntToFloat:
      case OpKind::FloatToInt:
      case OpKind::IndexCast:
      case OpKind::Bitcast: {
        ValueId v = value_use();
        expect_punct(":");
        type();
        expect_ident("to");
        Type dst = type();
        return build(name, {v}, {dst});
      }
      case OpKind::Alloc:
      case OpKind::Alloca: {
        expect_punct("(");
        expect_punct(")");
        expect_punct(":");
        return build(name, {}, {type()});
      }
      case OpKind::Load: {
        ValueId mem = value_use();
        expect_punct("[");
        auto idx = value_uses();
        expect_punct("]");
        expect_punct(":");
        Type mt = type();
        std::vector<ValueId> operands{mem};
        operands.insert(operands.end(), idx.begin(), idx.end());
        return build(name, operands, {mt.element()});
      }
      case OpKind::Store: {
        ValueId val = value_use();
        expect_punct(",");
        ValueId mem = value_use();
        expect_punct("[");
        auto idx = value_uses();
        expect_punct("]");
        expect_punct(":");
        type();
        std::vector<ValueId> operands{val, mem};
        operands.insert(operands.end(), idx.begin(), idx.end());
        return build(name, operands, {});
      }
      case OpKind::Dealloc: {
        ValueId mem = value_use();
        expect_punct(":");
        type();
        return build(name, {mem}, {});
      }
      case OpKind::Copy: {
        ValueId src = value_use();
        expect_punct(",");
        ValueId dst = value_use();
        expect_punct(":");
        type();
        expect_ident("to");
        type();
        return build(name, {src, dst}, {});
      }
      case OpKind::Call: {
        if (tok_.kind != Tok::Symbol) error("expected a callee symbol");
        std::string callee = consume().text;
        expect_punct("(");
        auto operands = value_uses();
        expect_punct(")");
        expect_punct(":");
        expect_punct("(");
        auto in = type_list_until(")");
        expect_punct(")");
        expect_arrow();
        auto out = result_types();
        if (in.size() != operands.size()) error("call operand type list length mismatch");
        return build(name, operands, out, {{"callee", callee}});
      }
      case OpKind::Return:
      case OpKind::Yield:
        return terminator(name, {});
      case OpKind::Condition: {
        expect_punct("(");
        ValueId cond = value_use();
        expect_punct(")");
        return terminator(name, {cond});
      }
      case OpKind::If:
        return scf_if();
      case OpKind::For:
        return scf_for();
      case OpKind::While:
        return scf_while();
      default:
        throw ParseError(at.line, at.column, fmt::format("unsupported op '{}'", name));
    }
  }

  Operation terminator(const std::string& name, std::vector<ValueId> leading) {
    auto operands = value_uses();
    if (!operands.empty()) {
      expect_punct(":");
      auto ts = type_list_until("\n");
      if (ts.size() != operands.size()) error("terminator type list length mismatch");
    }
    leading.insert(leading.end(), operands.begin(), operands.end());
    return build(name, leading, {});
  }

  Operation constant(const std::string& name) {
    Token lit = tok_;
    if (is_ident("true") || is_ident("false")) {
      consume();
      Type i1 = Type::integer(1);
      std::int64_t v = lit.text == "true" ? -1 : 0;
      if (is_punct(":")) {
        consume();
        if (type() != i1) error("boolean literal must have type i1");
      }
      return build(name, {}, {i1}, {{"value", IntegerAttr{v, i1}}});
    }
    if (lit.kind != Tok::Integer && lit.kind != Tok::Float) error("expected a literal");
    consume();
    expect_punct(":");
    Type t = type();
    const std::string& s = lit.text;
    if (t.is_float()) {
      std::uint64_t bits = 0;
      if (lit.kind == Tok::Integer && (s.starts_with("0x") || s.starts_with("0X"))) {
        bits = parse_hex(lit);
        if (t.width() < 64 && (bits >> t.width()) != 0) {
          throw ParseError(lit.line, lit.column, "hex float literal too wide");
        }
      } else {
        double d = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
        if (ec != std::errc{} || p != s.data() + s.size()) {
          throw ParseError(lit.line, lit.column, "malformed float literal");
        }
        bits = float_to_bits(d, t.width());
      }
      return build(name, {}, {t}, {{"value", FloatAttr{bits, t}}});
    }
    if (!t.is_int_like() || lit.kind != Tok::Integer) {
      throw ParseError(lit.line, lit.column, "literal does not match its type");
    }
    std::int64_t v = 0;
    if (s.starts_with("0x") || s.starts_with("0X")) {
      v = sign_extend(parse_hex(lit), t.width());
    } else {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || p != s.data() + s.size()) {
        throw ParseError(lit.line, lit.column, "integer literal out of range");
      }
      if (t.is_int() && t.width() < 64) {
        // Accept both signed and unsigned spellings of in-range literals.
        std::int64_t lo = -(std::int64_t{1} << (t.width() - 1));
        std::int64_t hi = static_cast<std::int64_t>(width_mask(t.width()));
        if (v < lo || v > hi) throw ParseError(lit.line, lit.column, "literal does not fit type");
        v = sign_extend(static_cast<std::uint64_t>(v), t.width());
      }
    }
    return build(name, {}, {t}, {{"value", IntegerAttr{v, t}}});
  }

  std::uint64_t parse_hex(const Token& lit) {
    std::string_view s = lit.text;
    std::uint64_t bits = 0;
    auto [p, ec] = std::from_chars(s.data() + 2, s.data() + s.size(), bits, 16);
    if (ec != std::errc{} || p != s.data() + s.size()) {
      throw ParseError(lit.line, lit.column, "malformed hex literal");
    }
    return bits;
  }

  Region region_block(const std::vector<Type>& arg_types) {
    Region r = make_region(m_, arg_types);
    expect_punct("{");
    Block& b = r.entry();
    if (tok_.kind == Tok::BlockLabel) block_label(b);
    else if (!arg_types.empty()) error("expected a block label with arguments");
    block_body(b);
    expect_punct("}");
    return r;
  }

  Operation scf_if() {
    ValueId cond = value_use();
    std::vector<Type> results;
    if (tok_.kind == Tok::Arrow) {
      consume();
      results = result_types();
    }
    std::vector<Region> regions;
    regions.push_back(region_block({}));
    if (is_ident("else")) {
      consume();
      regions.push_back(region_block({}));
    } else {
      // An omitted else region is an empty block with a bare yield.
      Region r = make_region(m_, {});
      r.entry().ops.push_back(build("scf.yield", {}, {}));
      regions.push_back(std::move(r));
    }
    return build("scf.if", {cond}, results, {}, std::move(regions));
  }

  Operation scf_for() {
    Token at = tok_;
    std::string iv = value_name();
    expect_punct("=");
    ValueId lb = value_use();
    expect_ident("to");
    ValueId ub = value_use();
    expect_ident("step");
    ValueId step = value_use();
    Region r = make_region(m_, {Type::index()});
    bind(iv, r.entry().arguments[0], at);
    expect_punct("{");
    block_body(r.entry());
    expect_punct("}");
    std::vector<Region> regions;
    regions.push_back(std::move(r));
    return build("scf.for", {lb, ub, step}, {}, {}, std::move(regions));
  }

  Operation scf_while() {
    std::vector<std::pair<Token, std::string>> arg_names;
    std::vector<ValueId> inits;
    if (is_punct("(")) {
      consume();
      while (!is_punct(")")) {
        Token at = tok_;
        arg_names.emplace_back(at, value_name());
        expect_punct("=");
        inits.push_back(value_use());
        if (!is_punct(",")) break;
        consume();
      }
      expect_punct(")");
    }
    expect_punct(":");
    expect_punct("(");
    auto in = type_list_until(")");
    expect_punct(")");
    expect_arrow();
    auto out = result_types();
    if (in.size() != inits.size()) error("scf.while init type list length mismatch");

    Region before = make_region(m_, in);
    for (std::size_t i = 0; i < arg_names.size(); ++i) {
      bind(arg_names[i].second, before.entry().arguments[i], arg_names[i].first);
    }
    expect_punct("{");
    block_body(before.entry());
    expect_punct("}");
    expect_ident("do");
    Region after = region_block(out);
    std::vector<Region> regions;
    regions.push_back(std::move(before));
    regions.push_back(std::move(after));
    return build("scf.while", inits, out, {}, std::move(regions));
  }

  Lexer lex_;
  Token tok_;
  Module m_;
  std::unordered_map<std::string, ValueId> names_;
};

}  // namespace

Module parse(std::string_view text) { return Parser(text).run(); }

}  // namespace irsmith
