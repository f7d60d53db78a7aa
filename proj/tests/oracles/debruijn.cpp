#include "debruijn.hpp"

#include <vector>

namespace atgforge::oracle {

namespace {

void render(const mock::ExprPtr& e, std::vector<std::string>& scope, std::string& out) {
  using mock::Op;
  switch (e->op) {
    case Op::num: out += "#" + std::to_string(e->value); return;
    case Op::var:
      for (std::size_t i = scope.size(); i-- > 0;) {
        if (scope[i] == e->name) {
          out += "@" + std::to_string(scope.size() - 1 - i);
          return;
        }
      }
      out += "$" + e->name;
      return;
    default: break;
  }
  out += "(" + std::to_string(static_cast<int>(e->op));
  if (e->op == Op::app || e->op == Op::ascribe) out += ":" + e->name;
  bool binder = e->op == Op::sum_range || e->op == Op::sum_ico;
  for (std::size_t i = 0; i < e->args.size(); ++i) {
    out += ' ';
    bool body = binder && i + 1 == e->args.size();
    if (body) scope.push_back(e->name);
    render(e->args[i], scope, out);
    if (body) scope.pop_back();
  }
  out += ")";
}

}  // namespace

std::string debruijn(const mock::ExprPtr& e) {
  std::vector<std::string> scope;
  std::string out;
  render(e, scope, out);
  return out;
}

bool structurally_equal(const mock::ExprPtr& a, const mock::ExprPtr& b) { return debruijn(a) == debruijn(b); }

}  // namespace atgforge::oracle
