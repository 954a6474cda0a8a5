#include "magplate/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "magplate/types.hpp"

namespace magplate {

struct Expression::Node {
  enum Kind { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call } kind = Const;
  double value = 0;
  int var = 0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> a, b;

  double eval(const double* x) const {
    switch (kind) {
      case Const: return value;
      case Var: return x[var];
      case Neg: return -a->eval(x);
      case Add: return a->eval(x) + b->eval(x);
      case Sub: return a->eval(x) - b->eval(x);
      case Mul: return a->eval(x) * b->eval(x);
      case Div: return a->eval(x) / b->eval(x);
      case Pow: return std::pow(a->eval(x), b->eval(x));
      case Call: return fn(a->eval(x));
    }
    return 0;
  }
};

namespace {

using NodeP = std::shared_ptr<const Expression::Node>;

NodeP make(Expression::Node::Kind k, NodeP a = nullptr, NodeP b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

const std::map<std::string, double (*)(double)>& functions() {
  static const std::map<std::string, double (*)(double)> f{
      {"sin", [](double x) { return std::sin(x); }},   {"cos", [](double x) { return std::cos(x); }},
      {"tan", [](double x) { return std::tan(x); }},   {"exp", [](double x) { return std::exp(x); }},
      {"log", [](double x) { return std::log(x); }},   {"sqrt", [](double x) { return std::sqrt(x); }},
      {"abs", [](double x) { return std::abs(x); }},   {"sinh", [](double x) { return std::sinh(x); }},
      {"cosh", [](double x) { return std::cosh(x); }}, {"tanh", [](double x) { return std::tanh(x); }},
      {"atan", [](double x) { return std::atan(x); }}};
  return f;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodeP parse() {
    NodeP n = sum();
    skip();
    if (i_ != s_.size()) fail("unexpected character");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "expression '" << s_ << "': " << what << " at position " << i_;
    throw ConfigError(os.str());
  }
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }

  NodeP sum() {
    NodeP n = product();
    for (;;) {
      if (eat('+'))
        n = make(Expression::Node::Add, n, product());
      else if (eat('-'))
        n = make(Expression::Node::Sub, n, product());
      else
        return n;
    }
  }
  NodeP product() {
    NodeP n = unary();
    for (;;) {
      if (eat('*'))
        n = make(Expression::Node::Mul, n, unary());
      else if (eat('/'))
        n = make(Expression::Node::Div, n, unary());
      else
        return n;
    }
  }
  // Unary minus binds looser than ^: -x^2 = -(x^2).
  NodeP unary() {
    if (eat('-')) return make(Expression::Node::Neg, unary());
    if (eat('+')) return unary();
    return power();
  }
  NodeP power() {
    NodeP base = atom();
    if (eat('^')) return make(Expression::Node::Pow, base, unary());
    return base;
  }
  NodeP atom() {
    skip();
    if (i_ >= s_.size()) fail("unexpected end");
    if (eat('(')) {
      NodeP n = sum();
      if (!eat(')')) fail("missing ')'");
      return n;
    }
    char c = s_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + i_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      i_ += std::size_t(end - begin);
      auto n = std::make_shared<Expression::Node>();
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i_;
      while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
      std::string id = s_.substr(i_, j - i_);
      i_ = j;
      auto n = std::make_shared<Expression::Node>();
      if (id == "x1" || id == "x2" || id == "x3") {
        n->kind = Expression::Node::Var;
        n->var = id[1] - '1';
        return n;
      }
      if (id == "pi") {
        n->value = std::acos(-1.0);
        return n;
      }
      if (id == "e") {
        n->value = std::exp(1.0);
        return n;
      }
      auto f = functions().find(id);
      if (f == functions().end()) fail("unknown identifier '" + id + "'");
      if (!eat('(')) fail("expected '(' after " + id);
      n->kind = Expression::Node::Call;
      n->fn = f->second;
      n->a = sum();
      if (!eat(')')) fail("missing ')'");
      return n;
    }
    fail(std::string("unexpected '") + c + "'");
  }

  const std::string& s_;
  std::size_t i_ = 0;
};

}  // namespace

Expression::Expression() : root_(std::make_shared<Node>()), text_("0") {}

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.root_ = Parser(text).parse();
  e.text_ = text;
  return e;
}

double Expression::operator()(double x1, double x2, double x3) const {
  const double x[3] = {x1, x2, x3};
  return root_->eval(x);
}

}  // namespace magplate
