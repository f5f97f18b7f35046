#pragma once

// Real-valued arithmetic expressions in the variables s1, s2, used to write
// custom coins in run configs.
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?          (right associative)
//   atom   := number | 's1' | 's2' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func   := sin | cos | exp | sqrt

#include <memory>
#include <string>
#include <string_view>

namespace qwalk {

class Expr {
public:
    /// Throws Error(config) with the offending column on malformed input.
    static Expr parse(std::string_view text);

    double operator()(double s1, double s2) const;
    const std::string& source() const { return source_; }

    struct Node;

private:
    std::string source_;
    std::shared_ptr<const Node> root_;
};

} // namespace qwalk
