#include "qfstab/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

namespace qfs {

double Polynomial::eval(std::span<const double> x, double zeta, std::span<const double> mu) const {
    double sum = 0.0;
    for (const Monomial& m : terms) {
        double v = m.coeff;
        for (const auto& [var, p] : m.factors) {
            double base;
            switch (var.kind) {
            case VarKind::X: base = x[var.index]; break;
            case VarKind::Zeta: base = zeta; break;
            default: base = mu[var.index]; break;
            }
            for (int k = 0; k < p; ++k) v *= base;
        }
        sum += v;
    }
    return sum;
}

namespace {

// combine like terms, sort factors and terms, drop zeros
Polynomial normalized(std::vector<Monomial> terms) {
    for (Monomial& m : terms) {
        std::sort(m.factors.begin(), m.factors.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::pair<VarRef, int>> merged;
        for (const auto& f : m.factors) {
            if (!merged.empty() && merged.back().first == f.first)
                merged.back().second += f.second;
            else
                merged.push_back(f);
        }
        m.factors = std::move(merged);
    }
    std::map<std::vector<std::pair<VarRef, int>>, double> combined;
    for (const Monomial& m : terms) combined[m.factors] += m.coeff;
    Polynomial p;
    for (auto& [factors, coeff] : combined)
        if (coeff != 0.0) p.terms.push_back({coeff, factors});
    return p;
}

} // namespace

Polynomial Polynomial::derivative_x(int i) const {
    std::vector<Monomial> out;
    for (const Monomial& m : terms) {
        for (size_t f = 0; f < m.factors.size(); ++f) {
            const auto& [var, p] = m.factors[f];
            if (var.kind != VarKind::X || var.index != i) continue;
            Monomial dm;
            dm.coeff = m.coeff * p;
            for (size_t g = 0; g < m.factors.size(); ++g) {
                if (g == f) {
                    if (p > 1) dm.factors.push_back({var, p - 1});
                } else {
                    dm.factors.push_back(m.factors[g]);
                }
            }
            out.push_back(std::move(dm));
        }
    }
    return normalized(std::move(out));
}

bool Polynomial::references(VarKind kind) const {
    for (const Monomial& m : terms)
        for (const auto& [var, p] : m.factors)
            if (var.kind == kind && p > 0) return true;
    return false;
}

int Polynomial::max_index(VarKind kind) const {
    int mx = -1;
    for (const Monomial& m : terms)
        for (const auto& [var, p] : m.factors)
            if (var.kind == kind && p > 0) mx = std::max(mx, var.index);
    return mx;
}

std::string Polynomial::to_string() const {
    if (terms.empty()) return "0";
    std::string out;
    for (size_t i = 0; i < terms.size(); ++i) {
        const Monomial& m = terms[i];
        double c = m.coeff;
        if (i == 0) {
            if (c < 0.0) out += "-";
        } else {
            out += c < 0.0 ? " - " : " + ";
        }
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", std::fabs(c));
        out += buf;
        for (const auto& [var, p] : m.factors) {
            out += "*";
            switch (var.kind) {
            case VarKind::X: out += "x" + std::to_string(var.index + 1); break;
            case VarKind::Zeta: out += "zeta"; break;
            default: out += "mu" + std::to_string(var.index + 1); break;
            }
            if (p != 1) out += "^" + std::to_string(p);
        }
    }
    return out;
}

// --- parser -------------------------------------------------------------------

namespace {

struct Parser {
    const std::string& text;
    size_t pos = 0;

    explicit Parser(const std::string& t) : text(t) {}

    [[noreturn]] void error(const std::string& msg) const {
        fail(errc::config, "polynomial '" + text + "': " + msg);
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    int parse_uint() {
        skip_ws();
        size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start) error("expected an integer");
        return std::atoi(text.substr(start, pos - start).c_str());
    }

    bool at_number() {
        char c = peek();
        return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
    }

    double parse_number() {
        skip_ws();
        const char* begin = text.c_str() + pos;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) error("expected a number");
        pos += static_cast<size_t>(end - begin);
        return v;
    }

    bool at_var() {
        char c = peek();
        return c == 'x' || c == 'z' || c == 'm';
    }

    VarRef parse_var() {
        skip_ws();
        if (text.compare(pos, 4, "zeta") == 0) {
            pos += 4;
            return {VarKind::Zeta, 0};
        }
        char c = text[pos];
        if (c == 'x' || c == 'm') {
            VarKind kind = c == 'x' ? VarKind::X : VarKind::Mu;
            pos += c == 'x' ? 1 : 0;
            if (c == 'm') {
                if (text.compare(pos, 2, "mu") != 0) error("unknown variable (expected x<i>, zeta or mu<i>)");
                pos += 2;
            }
            skip_ws();
            if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos]))) {
                if (kind == VarKind::Mu) return {VarKind::Mu, 0}; // bare "mu" means mu1
                error("variable x needs an index (x1, x2, ...)");
            }
            int idx = parse_uint();
            if (idx < 1) error("variable indices are 1-based");
            return {kind, idx - 1};
        }
        error("unknown variable (expected x<i>, zeta or mu<i>)");
    }

    Monomial parse_term() {
        Monomial m;
        m.coeff = 1.0;
        bool saw_factor = false;
        for (;;) {
            if (at_number()) {
                m.coeff *= parse_number();
                saw_factor = true;
            } else if (at_var()) {
                VarRef v = parse_var();
                int p = 1;
                if (eat('^')) p = parse_uint();
                if (p < 0) error("negative powers are not supported");
                if (p > 0) m.factors.push_back({v, p});
                saw_factor = true;
            } else {
                error("expected a coefficient or variable");
            }
            if (!eat('*')) break;
        }
        if (!saw_factor) error("empty term");
        return m;
    }

    Polynomial parse() {
        std::vector<Monomial> terms;
        skip_ws();
        if (pos >= text.size()) error("empty expression");
        bool negate = false;
        if (eat('-'))
            negate = true;
        else
            eat('+');
        for (;;) {
            Monomial m = parse_term();
            if (negate) m.coeff = -m.coeff;
            terms.push_back(std::move(m));
            skip_ws();
            if (pos >= text.size()) break;
            if (eat('+'))
                negate = false;
            else if (eat('-'))
                negate = true;
            else
                error("expected '+' or '-' between terms");
        }
        return normalized(std::move(terms));
    }
};

} // namespace

Polynomial parse_polynomial(const std::string& text) { return Parser(text).parse(); }

} // namespace qfs
