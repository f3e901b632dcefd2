#include "rblab/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "rblab/errors.hpp"

namespace rblab::expr {

namespace {

constexpr const char* kModule = "expr";

struct Token {
  enum class Kind { Number, Ident, Plus, Minus, Star, Slash, Caret,
                    LParen, RParen, Comma, End };
  Kind kind;
  double number = 0.0;
  std::string ident;
};

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    // UTF-8 multiplication and division signs are accepted as aliases.
    if (c == 0xC3 && i + 1 < n) {
      const unsigned char c2 = static_cast<unsigned char>(text[i + 1]);
      if (c2 == 0x97) {
        out.push_back({Token::Kind::Star});
        i += 2;
        continue;
      }
      if (c2 == 0xB7) {
        out.push_back({Token::Kind::Slash});
        i += 2;
        continue;
      }
    }
    // The UTF-8 minus sign (0xE2 0x88 0x92) as an alias for '-'.
    if (c == 0xE2 && i + 2 < n &&
        static_cast<unsigned char>(text[i + 1]) == 0x88 &&
        static_cast<unsigned char>(text[i + 2]) == 0x92) {
      out.push_back({Token::Kind::Minus});
      i += 3;
      continue;
    }
    if (std::isdigit(c) || c == '.') {
      char* end = nullptr;
      const double v = std::strtod(text.c_str() + i, &end);
      if (end == text.c_str() + i) {
        raise(ErrorKind::Config, kModule, "parse",
              "malformed number near '" + text.substr(i, 8) + "'");
      }
      Token t{Token::Kind::Number};
      t.number = v;
      out.push_back(t);
      i = static_cast<std::size_t>(end - text.c_str());
      continue;
    }
    if (std::isalpha(c) || c == '_') {
      std::size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) ||
                       text[j] == '_')) {
        ++j;
      }
      Token t{Token::Kind::Ident};
      t.ident = text.substr(i, j - i);
      out.push_back(t);
      i = j;
      continue;
    }
    switch (c) {
      case '+': out.push_back({Token::Kind::Plus}); break;
      case '-': out.push_back({Token::Kind::Minus}); break;
      case '*': out.push_back({Token::Kind::Star}); break;
      case '/': out.push_back({Token::Kind::Slash}); break;
      case '^': out.push_back({Token::Kind::Caret}); break;
      case '(': out.push_back({Token::Kind::LParen}); break;
      case ')': out.push_back({Token::Kind::RParen}); break;
      case ',': out.push_back({Token::Kind::Comma}); break;
      default:
        raise(ErrorKind::Config, kModule, "parse",
              std::string("unexpected character '") + static_cast<char>(c) +
                  "'");
    }
    ++i;
  }
  out.push_back({Token::Kind::End});
  return out;
}

}  // namespace

class Parser {
 public:
  Parser(std::vector<Token> tokens, Expression& target)
      : tokens_(std::move(tokens)), expr_(target) {}

  void run() {
    parse_sum();
    if (peek().kind != Token::Kind::End) {
      raise(ErrorKind::Config, kModule, "parse",
            "trailing input after a complete expression");
    }
  }

 private:
  using Op = Expression::Op;

  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }
  bool accept(Token::Kind k) {
    if (peek().kind == k) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(Token::Kind k, const char* what) {
    if (!accept(k)) {
      raise(ErrorKind::Config, kModule, "parse",
            std::string("expected ") + what);
    }
  }
  void emit(Op op, double v = 0.0) { expr_.program_.push_back({op, v}); }

  void parse_sum() {
    parse_product();
    while (true) {
      if (accept(Token::Kind::Plus)) {
        parse_product();
        emit(Op::Add);
      } else if (accept(Token::Kind::Minus)) {
        parse_product();
        emit(Op::Sub);
      } else {
        return;
      }
    }
  }

  void parse_product() {
    parse_unary();
    while (true) {
      if (accept(Token::Kind::Star)) {
        parse_unary();
        emit(Op::Mul);
      } else if (accept(Token::Kind::Slash)) {
        parse_unary();
        emit(Op::Div);
      } else {
        return;
      }
    }
  }

  void parse_unary() {
    if (accept(Token::Kind::Minus)) {
      parse_unary();
      emit(Op::Neg);
      return;
    }
    parse_power();
  }

  void parse_power() {
    parse_primary();
    if (accept(Token::Kind::Caret)) {
      parse_unary();  // right-associative; allows a ^ -b
      emit(Op::Pow);
    }
  }

  void parse_primary() {
    const Token& tok = advance();
    switch (tok.kind) {
      case Token::Kind::Number:
        emit(Op::PushConst, tok.number);
        return;
      case Token::Kind::LParen:
        parse_sum();
        expect(Token::Kind::RParen, "')'");
        return;
      case Token::Kind::Ident:
        parse_ident(tok.ident);
        return;
      default:
        raise(ErrorKind::Config, kModule, "parse",
              "expected a number, variable, function, or '('");
    }
  }

  void parse_ident(const std::string& name) {
    if (name == "t") { emit(Op::PushT); expr_.uses_t_ = true; return; }
    if (name == "y") { emit(Op::PushY); expr_.uses_y_ = true; return; }
    if (name == "z") { emit(Op::PushZ); expr_.uses_z_ = true; return; }
    if (name == "b") { emit(Op::PushB); expr_.uses_b_ = true; return; }
    if (name == "exp" || name == "ln" || name == "abs") {
      expect(Token::Kind::LParen, "'(' after function name");
      parse_sum();
      expect(Token::Kind::RParen, "')'");
      emit(name == "exp" ? Op::Exp : name == "ln" ? Op::Ln : Op::Abs);
      return;
    }
    if (name == "max" || name == "min") {
      expect(Token::Kind::LParen, "'(' after function name");
      parse_sum();
      expect(Token::Kind::Comma, "',' between the two arguments");
      parse_sum();
      expect(Token::Kind::RParen, "')'");
      emit(name == "max" ? Op::Max : Op::Min);
      return;
    }
    raise(ErrorKind::Config, kModule, "parse",
          "unknown identifier '" + name + "'");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  Expression& expr_;
};

Expression Expression::parse(const std::string& text) {
  // Guard the recursive-descent parser before it runs: nesting depth is the
  // recursion depth, so adversarial inputs must be rejected up front.
  int paren = 0, deepest = 0;
  for (const char c : text) {
    if (c == '(') deepest = std::max(deepest, ++paren);
    if (c == ')') --paren;
  }
  if (deepest > 64) {
    raise(ErrorKind::Config, kModule, "parse",
          "expression is too deeply nested");
  }
  Expression e;
  e.text_ = text;
  Parser parser(tokenize(text), e);
  parser.run();
  int depth = 0, max_depth = 0;
  for (const Step& s : e.program_) {
    switch (s.op) {
      case Op::Add: case Op::Sub: case Op::Mul: case Op::Div:
      case Op::Pow: case Op::Max: case Op::Min:
        --depth;
        break;
      case Op::Neg: case Op::Exp: case Op::Ln: case Op::Abs:
        break;
      default:
        ++depth;
        break;
    }
    max_depth = std::max(max_depth, depth);
  }
  if (max_depth > 64) {
    raise(ErrorKind::Config, kModule, "parse",
          "expression is too deeply nested");
  }
  return e;
}

double Expression::eval(const Env& env) const {
  double stack[64];
  int top = -1;
  for (const Step& s : program_) {
    switch (s.op) {
      case Op::PushConst: stack[++top] = s.value; break;
      case Op::PushT: stack[++top] = env.t; break;
      case Op::PushY: stack[++top] = env.y; break;
      case Op::PushZ: stack[++top] = env.z; break;
      case Op::PushB: stack[++top] = env.b; break;
      case Op::Add: --top; stack[top] += stack[top + 1]; break;
      case Op::Sub: --top; stack[top] -= stack[top + 1]; break;
      case Op::Mul: --top; stack[top] *= stack[top + 1]; break;
      case Op::Div: --top; stack[top] /= stack[top + 1]; break;
      case Op::Pow: --top; stack[top] = std::pow(stack[top], stack[top + 1]); break;
      case Op::Neg: stack[top] = -stack[top]; break;
      case Op::Exp: stack[top] = std::exp(stack[top]); break;
      case Op::Ln: stack[top] = std::log(stack[top]); break;
      case Op::Abs: stack[top] = std::abs(stack[top]); break;
      case Op::Max: --top; stack[top] = std::max(stack[top], stack[top + 1]); break;
      case Op::Min: --top; stack[top] = std::min(stack[top], stack[top + 1]); break;
    }
  }
  return stack[0];
}

bool Expression::uses(char variable) const {
  switch (variable) {
    case 't': return uses_t_;
    case 'y': return uses_y_;
    case 'z': return uses_z_;
    case 'b': return uses_b_;
    default: return false;
  }
}

}  // namespace rblab::expr
