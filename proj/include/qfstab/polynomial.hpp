#ifndef QFSTAB_POLYNOMIAL_HPP
#define QFSTAB_POLYNOMIAL_HPP

#include <span>
#include <string>
#include <vector>

#include "qfstab/errors.hpp"

namespace qfs {

// Sparse polynomials in the variables x1..xN, zeta, mu1..muK. This is the
// whole expression language for declarative plant terms: sums of
// coefficient * monomial, e.g. "-1*x1 + 0.5*x1^2*mu1 - zeta".
enum class VarKind { X, Zeta, Mu };

struct VarRef {
    VarKind kind = VarKind::X;
    int index = 0; // 0-based; ignored for Zeta

    auto operator<=>(const VarRef&) const = default;
};

struct Monomial {
    double coeff = 0.0;
    std::vector<std::pair<VarRef, int>> factors; // sorted by variable, powers >= 1

    bool operator==(const Monomial&) const = default;
};

struct Polynomial {
    std::vector<Monomial> terms; // canonical: sorted, combined, no zero terms

    double eval(std::span<const double> x, double zeta, std::span<const double> mu) const;
    Polynomial derivative_x(int i) const;
    bool references(VarKind kind) const;
    int max_index(VarKind kind) const; // largest 0-based index used, -1 if none
    std::string to_string() const;

    bool operator==(const Polynomial&) const = default;
};

// Throws a config error on malformed input. parse(to_string(p)) == p.
Polynomial parse_polynomial(const std::string& text);

} // namespace qfs

#endif
