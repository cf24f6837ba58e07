#pragma once
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "fbse/model.hpp"
#include "fbse/types.hpp"

namespace fbse {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

struct RationalParams {
    Rational t1, t2, gamma1, gamma2;
};

// Dense exact-arithmetic matrix; rank computed without rounding.
struct RationalMatrix {
    int rows = 0, cols = 0;
    std::vector<Rational> a;

    RationalMatrix() = default;
    RationalMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}
    Rational& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    const Rational& at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
};

RationalMatrix operator*(const RationalMatrix& x, const RationalMatrix& y);

// Exact rank by fraction-free (Bareiss) elimination after clearing row denominators.
int exact_rank(const RationalMatrix& m);

// OBC Hamiltonian of the built-in model in exact arithmetic (same block placement
// as obc_hamiltonian).
RationalMatrix obc_rational(const RationalParams& p, int cells);

// dim ker H_OBC, exactly.
int exact_null_dim(const RationalParams& p, int cells);

// Same quantity via the anti-block structure: dim ker A + dim ker B for the
// A-rows-to-(B,C)-columns and (B,C)-rows-to-A-columns blocks.
int exact_null_dim_blockwise(const RationalParams& p, int cells);

struct MultiplicityReport {
    int algebraic_zero = 0;  // eigenvalues with |E| < tol
    int geometric_zero = 0;  // singular-value null-space dimension
    bool is_ep = false;      // algebraic > geometric
    int cells = 0;
    bool ambiguous_tolerance = false;  // eigenvalues straddle tol within a factor 10
    std::string warning;
};

MultiplicityReport multiplicities_at_zero(const CMatrix& h_obc, double tol);

// Exact Jordan data at one eigenvalue: dim ker (H - lambda)^k until stable.
struct EigenvalueStructure {
    Rational eigenvalue;
    std::vector<int> kernel_dims;  // kernel_dims[k-1] = dim ker (H - lambda)^k
    int geometric() const { return kernel_dims.front(); }
    int algebraic() const { return kernel_dims.back(); }
};

struct JordanReport {
    int cells = 0;
    EigenvalueStructure zero, plus_t2, minus_t2;
    bool accounts_for_all() const {
        return zero.algebraic() + plus_t2.algebraic() + minus_t2.algebraic() == 3 * cells;
    }
};

// Exact Jordan structure on the special locus t1 = gamma1, t2 = gamma2.
JordanReport jordan_special_case(const Rational& t1_eq_gamma1, const Rational& t2_eq_gamma2,
                                 int cells);

struct EpLocus {
    double gamma1 = 0.0, gamma2 = 0.0;  // refined crossing point
    double min_abs_e = 0.0;             // smallest dispersive |E| at the refined point
    MultiplicityReport multiplicity;    // re-check at the refined point
};

struct EpScanResult {
    std::vector<double> gamma1_grid, gamma2_grid;
    RMatrix signed_min_e;  // min dispersive |E|, signed by real-vs-imaginary character
    std::vector<EpLocus> loci;
    int unresolved = 0;  // sign flips that did not converge to a zero crossing
};

// Scan of the smallest dispersive OBC eigenvalue over the gamma plane; EP loci
// where it reaches zero (sign change of the real/imaginary character), refined by
// bisection and re-checked with multiplicities_at_zero.
EpScanResult obc_ep_scan(const ParamSet& base, const std::vector<double>& gamma1_grid,
                         const std::vector<double>& gamma2_grid, int cells);

// Smallest dispersive |E| signed by the character of the closest-to-zero
// dispersive eigenvalue (+ predominantly real, - predominantly imaginary).
double signed_min_dispersive(const ParamSet& p, int cells);

struct TransformChain {
    CMatrix u1;      // 6N x 6N unitary, (1/sqrt2) [[-i,-1],[i,-1]] (x) I
    RMatrix u2;      // 6N x 6N shuffle permutation
    RMatrix h2;      // [[0, H], [-H, 0]]
    RMatrix h2_bar;  // U2^T H2 U2 = diag(H3, -H3)
    RMatrix h3;
};

// Spectrum-rotating chain of the doubled real Hamiltonian: eig(H3) = i eig(H_OBC).
TransformChain rotate_spectrum(const CMatrix& h_obc);

} // namespace fbse
