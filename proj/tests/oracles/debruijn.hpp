#pragma once

#include <string>

#include "atgforge/prover/expr.hpp"

namespace atgforge::oracle {

// Canonical rendering with sum binders replaced by de Bruijn indices; two
// terms are structurally equal up to binder names iff their renderings match.
std::string debruijn(const mock::ExprPtr& e);

bool structurally_equal(const mock::ExprPtr& a, const mock::ExprPtr& b);

}  // namespace atgforge::oracle
