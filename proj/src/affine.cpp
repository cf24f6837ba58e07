#include "fbse/affine.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

namespace fbse {

double AffineExpr::eval(const std::map<std::string, double>& values) const {
    double acc = constant;
    for (const auto& [name, c] : coeffs) {
        auto it = values.find(name);
        if (it == values.end())
            throw ConfigError("unbound parameter name '" + name + "'");
        acc += c * it->second;
    }
    return acc;
}

std::string AffineExpr::to_string() const {
    std::ostringstream out;
    bool first = true;
    auto emit_num = [&](double v) {
        std::ostringstream n;
        n.precision(17);
        n << v;
        return n.str();
    };
    for (const auto& [name, c] : coeffs) {
        if (c == 0.0) continue;
        if (first) {
            if (c == 1.0) out << name;
            else if (c == -1.0) out << "-" << name;
            else out << emit_num(c) << "*" << name;
            first = false;
        } else {
            double a = c < 0 ? -c : c;
            out << (c < 0 ? " - " : " + ");
            if (a == 1.0) out << name;
            else out << emit_num(a) << "*" << name;
        }
    }
    if (constant != 0.0 || first) {
        if (first) out << emit_num(constant);
        else {
            double a = constant < 0 ? -constant : constant;
            out << (constant < 0 ? " - " : " + ") << emit_num(a);
        }
    }
    return out.str();
}

namespace {

struct Lexer {
    const std::string& s;
    size_t i = 0;
    explicit Lexer(const std::string& text) : s(text) {}

    void skip_ws() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool done() { skip_ws(); return i >= s.size(); }
    char peek() { skip_ws(); return i < s.size() ? s[i] : '\0'; }
    char take() { skip_ws(); return s[i++]; }

    double number() {
        skip_ws();
        const char* begin = s.c_str() + i;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin)
            throw ParseError("expected number at position " + std::to_string(i) + " in '" + s + "'");
        i += static_cast<size_t>(end - begin);
        return v;
    }
    std::string ident() {
        skip_ws();
        size_t start = i;
        while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
        if (i == start)
            throw ParseError("expected identifier at position " + std::to_string(i) + " in '" + s + "'");
        return s.substr(start, i - start);
    }
};

} // namespace

// term := number ['*' ident] | ident ['*' number]
AffineExpr AffineExpr::parse(const std::string& text) {
    AffineExpr e;
    Lexer lx(text);
    if (lx.done()) throw ParseError("empty expression");
    bool first = true;
    while (!lx.done()) {
        double sign = 1.0;
        char c = lx.peek();
        if (c == '+' || c == '-') {
            lx.take();
            sign = (c == '-') ? -1.0 : 1.0;
        } else if (!first) {
            throw ParseError("expected '+' or '-' at position " + std::to_string(lx.i) + " in '" + text + "'");
        }
        first = false;
        c = lx.peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double v = sign * lx.number();
            if (lx.peek() == '*') {
                lx.take();
                e.coeffs[lx.ident()] += v;
            } else {
                e.constant += v;
            }
        } else {
            std::string name = lx.ident();
            double v = sign;
            if (lx.peek() == '*') {
                lx.take();
                v *= lx.number();
            }
            e.coeffs[name] += v;
        }
    }
    for (auto it = e.coeffs.begin(); it != e.coeffs.end();)
        it = (it->second == 0.0) ? e.coeffs.erase(it) : std::next(it);
    return e;
}

} // namespace fbse
