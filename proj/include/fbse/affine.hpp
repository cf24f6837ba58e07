#pragma once
#include <map>
#include <string>

#include "fbse/errors.hpp"

namespace fbse {

// Affine expression in named real parameters: constant + sum coeff_i * name_i.
// Covers every matrix entry of the supported models ("t1 - gamma1", "-t2", "0.5*t2 + 1").
struct AffineExpr {
    double constant = 0.0;
    std::map<std::string, double> coeffs;

    bool operator==(const AffineExpr&) const = default;
    bool is_zero() const { return constant == 0.0 && coeffs.empty(); }

    double eval(const std::map<std::string, double>& values) const;
    std::string to_string() const;

    static AffineExpr parse(const std::string& text);
};

} // namespace fbse
