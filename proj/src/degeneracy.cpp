#include "fbse/degeneracy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "fbse/spectra.hpp"

namespace fbse {

RationalMatrix operator*(const RationalMatrix& x, const RationalMatrix& y) {
    if (x.cols != y.rows) throw PreconditionError("RationalMatrix: dimension mismatch");
    RationalMatrix z(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int l = 0; l < x.cols; ++l) {
            const Rational& v = x.at(i, l);
            if (v == 0) continue;
            for (int j = 0; j < y.cols; ++j) {
                const Rational& w = y.at(l, j);
                if (w != 0) z.at(i, j) += v * w;
            }
        }
    return z;
}

namespace {

// Clear denominators row by row (rank-preserving), then Bareiss fraction-free
// elimination over integers. Pivoting by largest absolute entry keeps growth down.
std::vector<std::vector<BigInt>> to_integer_rows(const RationalMatrix& m) {
    std::vector<std::vector<BigInt>> rows(static_cast<size_t>(m.rows));
    for (int i = 0; i < m.rows; ++i) {
        BigInt lcm = 1;
        for (int j = 0; j < m.cols; ++j) {
            const BigInt d = denominator(m.at(i, j));
            lcm = lcm / gcd(lcm, d) * d;
        }
        rows[static_cast<size_t>(i)].resize(static_cast<size_t>(m.cols));
        for (int j = 0; j < m.cols; ++j) {
            const Rational scaled = m.at(i, j) * lcm;
            rows[static_cast<size_t>(i)][static_cast<size_t>(j)] = numerator(scaled);
        }
    }
    return rows;
}

} // namespace

int exact_rank(const RationalMatrix& m) {
    auto a = to_integer_rows(m);
    const int rows = m.rows, cols = m.cols;
    int rank = 0;
    BigInt prev_pivot = 1;
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int piv = -1;
        BigInt best = 0;
        for (int i = r; i < rows; ++i) {
            BigInt mag = abs(a[static_cast<size_t>(i)][static_cast<size_t>(c)]);
            if (mag != 0 && (piv < 0 || mag > best)) {
                piv = i;
                best = mag;
            }
        }
        if (piv < 0) continue;
        std::swap(a[static_cast<size_t>(r)], a[static_cast<size_t>(piv)]);
        const BigInt pivot = a[static_cast<size_t>(r)][static_cast<size_t>(c)];
        for (int i = r + 1; i < rows; ++i) {
            auto& row_i = a[static_cast<size_t>(i)];
            const auto& row_r = a[static_cast<size_t>(r)];
            const BigInt head = row_i[static_cast<size_t>(c)];
            for (int j = c; j < cols; ++j) {
                BigInt q, rem;
                divide_qr(pivot * row_i[static_cast<size_t>(j)] -
                              head * row_r[static_cast<size_t>(j)],
                          prev_pivot, q, rem);
                if (rem != 0)
                    throw NumericalError("exact_rank: fraction-free update not divisible");
                row_i[static_cast<size_t>(j)] = std::move(q);
            }
        }
        prev_pivot = pivot;
        ++rank;
        ++r;
    }
    return rank;
}

RationalMatrix obc_rational(const RationalParams& p, int cells) {
    if (cells < 2) throw PreconditionError("obc_rational: need at least 2 unit cells");
    RationalMatrix H(3 * cells, 3 * cells);
    for (int n = 0; n < cells; ++n) {
        const int a = 3 * n, b = 3 * n + 1, c = 3 * n + 2;
        H.at(a, b) = p.t1 - p.gamma1;
        H.at(b, a) = p.t1 + p.gamma1;
        H.at(a, c) = p.t2 - p.gamma2;
        H.at(c, a) = p.t2 + p.gamma2;
    }
    for (int n = 0; n + 1 < cells; ++n) {
        H.at(3 * n, 3 * (n + 1) + 1) = p.t2;      // Tminus block: H[a_n, b_{n+1}]
        H.at(3 * (n + 1) + 1, 3 * n) = p.t2;      // Tplus block:  H[b_{n+1}, a_n]
    }
    return H;
}

int exact_null_dim(const RationalParams& p, int cells) {
    const RationalMatrix H = obc_rational(p, cells);
    return H.cols - exact_rank(H);
}

int exact_null_dim_blockwise(const RationalParams& p, int cells) {
    const RationalMatrix H = obc_rational(p, cells);
    const int N = cells;
    // permute to the (a_1..a_N | b_1..b_N c_1..c_N) basis: H = [[0, A],[B, 0]]
    std::vector<int> a_idx, bc_idx;
    for (int n = 0; n < N; ++n) a_idx.push_back(3 * n);
    for (int n = 0; n < N; ++n) bc_idx.push_back(3 * n + 1);
    for (int n = 0; n < N; ++n) bc_idx.push_back(3 * n + 2);
    RationalMatrix A(N, 2 * N), B(2 * N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < 2 * N; ++j) A.at(i, j) = H.at(a_idx[static_cast<size_t>(i)],
                                                          bc_idx[static_cast<size_t>(j)]);
    for (int i = 0; i < 2 * N; ++i)
        for (int j = 0; j < N; ++j) B.at(i, j) = H.at(bc_idx[static_cast<size_t>(i)],
                                                      a_idx[static_cast<size_t>(j)]);
    const int ker_a = 2 * N - exact_rank(A);
    const int ker_b = N - exact_rank(B);
    return ker_a + ker_b;
}

MultiplicityReport multiplicities_at_zero(const CMatrix& h_obc, double tol) {
    MultiplicityReport rep;
    rep.cells = static_cast<int>(h_obc.rows()) / 3;
    const Spectrum s = eig_general(h_obc, false);
    for (const auto& e : s.values) {
        const double m = std::abs(e);
        if (m < tol) ++rep.algebraic_zero;
        if (m >= tol / 10.0 && m <= tol * 10.0) rep.ambiguous_tolerance = true;
    }
    if (rep.ambiguous_tolerance) {
        std::ostringstream w;
        w << "eigenvalues within a factor 10 of tol=" << tol
          << "; zero-cluster separation ambiguous";
        rep.warning = w.str();
    }
    Eigen::JacobiSVD<CMatrix> svd(h_obc);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv[0] : 0.0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] < 1e-10 * smax) ++rep.geometric_zero;
    rep.is_ep = rep.algebraic_zero > rep.geometric_zero;
    return rep;
}

namespace {

EigenvalueStructure eigenvalue_structure(const RationalMatrix& H, const Rational& lambda) {
    const int D = H.rows;
    RationalMatrix shifted = H;
    for (int i = 0; i < D; ++i) shifted.at(i, i) -= lambda;
    EigenvalueStructure es;
    es.eigenvalue = lambda;
    RationalMatrix power = shifted;
    int prev = -1;
    for (int k = 1; k <= D; ++k) {
        const int dim = D - exact_rank(power);
        es.kernel_dims.push_back(dim);
        if (dim == prev) break;  // generalized eigenspace saturated
        prev = dim;
        if (k < D) power = power * shifted;
    }
    // drop the duplicate saturation entry
    if (es.kernel_dims.size() >= 2 &&
        es.kernel_dims.back() == es.kernel_dims[es.kernel_dims.size() - 2])
        es.kernel_dims.pop_back();
    return es;
}

} // namespace

JordanReport jordan_special_case(const Rational& t1_eq_gamma1, const Rational& t2_eq_gamma2,
                                 int cells) {
    if (t2_eq_gamma2 == 0)
        throw PreconditionError("jordan_special_case: t2 = 0 collapses the D blocks");
    RationalParams p{t1_eq_gamma1, t2_eq_gamma2, t1_eq_gamma1, t2_eq_gamma2};
    const RationalMatrix H = obc_rational(p, cells);
    JordanReport rep;
    rep.cells = cells;
    rep.zero = eigenvalue_structure(H, Rational(0));
    rep.plus_t2 = eigenvalue_structure(H, t2_eq_gamma2);
    rep.minus_t2 = eigenvalue_structure(H, -t2_eq_gamma2);
    return rep;
}

double signed_min_dispersive(const ParamSet& p, int cells) {
    const Spectrum s = eig_general(obc_hamiltonian(builtin_flatband3(), p, cells), false);
    std::vector<Complex> ev = s.values;
    std::sort(ev.begin(), ev.end(),
              [](const Complex& a, const Complex& b) { return std::abs(a) < std::abs(b); });
    const Complex e = ev[static_cast<size_t>(cells)];  // first above the N flat-band zeros
    const double sign = std::abs(e.real()) >= std::abs(e.imag()) ? 1.0 : -1.0;
    return sign * std::abs(e);
}

namespace {

// Sign-bisection along one grid edge; the crossing is where the closest-to-zero
// dispersive pair turns from real to imaginary (the OBC EP).
std::pair<double, double> bisect_crossing(const ParamSet& base, int cells, double g1a, double g2a,
                                          double g1b, double g2b, int iters) {
    ParamSet pa = base;
    pa.gamma1 = g1a;
    pa.gamma2 = g2a;
    double fa = signed_min_dispersive(pa, cells);
    double xa = 0.0, xb = 1.0;
    for (int it = 0; it < iters; ++it) {
        const double xm = 0.5 * (xa + xb);
        ParamSet pm = base;
        pm.gamma1 = g1a + xm * (g1b - g1a);
        pm.gamma2 = g2a + xm * (g2b - g2a);
        const double fm = signed_min_dispersive(pm, cells);
        if ((fa > 0) == (fm > 0)) {
            xa = xm;
            fa = fm;
        } else {
            xb = xm;
        }
    }
    const double xm = 0.5 * (xa + xb);
    return {g1a + xm * (g1b - g1a), g2a + xm * (g2b - g2a)};
}

} // namespace

EpScanResult obc_ep_scan(const ParamSet& base, const std::vector<double>& gamma1_grid,
                         const std::vector<double>& gamma2_grid, int cells) {
    if (cells < 8) throw PreconditionError("obc_ep_scan: need at least 8 unit cells");
    EpScanResult out;
    out.gamma1_grid = gamma1_grid;
    out.gamma2_grid = gamma2_grid;
    const int n1 = static_cast<int>(gamma1_grid.size());
    const int n2 = static_cast<int>(gamma2_grid.size());
    out.signed_min_e.resize(n1, n2);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            ParamSet p = base;
            p.gamma1 = gamma1_grid[static_cast<size_t>(i)];
            p.gamma2 = gamma2_grid[static_cast<size_t>(j)];
            out.signed_min_e(i, j) = signed_min_dispersive(p, cells);
        }

    auto add_locus = [&](double g1a, double g2a, double g1b, double g2b) {
        // 52 sign-bisections pin the curve to machine precision so the EP cluster
        // is visible to the multiplicity re-check
        auto [g1, g2] = bisect_crossing(base, cells, g1a, g2a, g1b, g2b, 52);
        ParamSet p = base;
        p.gamma1 = g1;
        p.gamma2 = g2;
        EpLocus locus;
        locus.gamma1 = g1;
        locus.gamma2 = g2;
        locus.min_abs_e = std::abs(signed_min_dispersive(p, cells));
        if (locus.min_abs_e > 1e-4) {
            // the sign also flips where the minimizing eigenvalue changes identity
            // at finite |E|; that is not a zero crossing
            ++out.unresolved;
            return;
        }
        const CMatrix H = obc_hamiltonian(builtin_flatband3(), p, cells);
        locus.multiplicity = multiplicities_at_zero(H, 1e-4 * H.norm());
        out.loci.push_back(locus);
    };

    for (int i = 0; i < n1; ++i)
        for (int j = 0; j + 1 < n2; ++j)
            if (out.signed_min_e(i, j) * out.signed_min_e(i, j + 1) < 0)
                add_locus(gamma1_grid[static_cast<size_t>(i)], gamma2_grid[static_cast<size_t>(j)],
                          gamma1_grid[static_cast<size_t>(i)],
                          gamma2_grid[static_cast<size_t>(j + 1)]);
    for (int j = 0; j < n2; ++j)
        for (int i = 0; i + 1 < n1; ++i)
            if (out.signed_min_e(i, j) * out.signed_min_e(i + 1, j) < 0)
                add_locus(gamma1_grid[static_cast<size_t>(i)], gamma2_grid[static_cast<size_t>(j)],
                          gamma1_grid[static_cast<size_t>(i + 1)],
                          gamma2_grid[static_cast<size_t>(j)]);
    return out;
}

TransformChain rotate_spectrum(const CMatrix& h_obc) {
    if (h_obc.imag().cwiseAbs().maxCoeff() > 1e-14 * std::max(1.0, h_obc.norm()))
        throw PreconditionError("rotate_spectrum: H_OBC must be real-valued");
    const int D = static_cast<int>(h_obc.rows());
    const RMatrix H = h_obc.real();

    TransformChain tc;
    tc.h2 = RMatrix::Zero(2 * D, 2 * D);
    tc.h2.block(0, D, D, D) = H;
    tc.h2.block(D, 0, D, D) = -H;

    // U1 = (1/sqrt2) [[-i, -1], [i, -1]] (x) I, mapping diag(iH, -iH) to H2
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    tc.u1 = CMatrix::Zero(2 * D, 2 * D);
    const CMatrix id = CMatrix::Identity(D, D);
    tc.u1.block(0, 0, D, D) = Complex(0.0, -1.0) * inv_sqrt2 * id;
    tc.u1.block(0, D, D, D) = Complex(-1.0, 0.0) * inv_sqrt2 * id;
    tc.u1.block(D, 0, D, D) = Complex(0.0, 1.0) * inv_sqrt2 * id;
    tc.u1.block(D, D, D, D) = Complex(-1.0, 0.0) * inv_sqrt2 * id;
    CMatrix h1_block = CMatrix::Zero(2 * D, 2 * D);
    h1_block.block(0, 0, D, D) = Complex(0.0, 1.0) * H;
    h1_block.block(D, D, D, D) = Complex(0.0, -1.0) * H;
    if ((tc.u1.adjoint() * h1_block * tc.u1 - tc.h2.cast<Complex>()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(1.0, H.norm()))
        throw NumericalError("rotate_spectrum: U1 transform does not reproduce H2");

    // shuffle permutation: swap the two copies on A-sites (1-based index n with n mod 3 = 1),
    // identity elsewhere
    tc.u2 = RMatrix::Zero(2 * D, 2 * D);
    for (int n = 1; n <= 2 * D; ++n)
        if (n % 3 != 1) tc.u2(n - 1, n - 1) = 1.0;
    for (int n = 1; n <= D; ++n)
        if (n % 3 == 1) {
            tc.u2(n - 1, n + D - 1) = 1.0;
            tc.u2(n + D - 1, n - 1) = 1.0;
        }
    for (int i = 0; i < 2 * D; ++i) {
        double rs = 0.0, cs = 0.0;
        for (int j = 0; j < 2 * D; ++j) {
            rs += tc.u2(i, j);
            cs += tc.u2(j, i);
            if (tc.u2(i, j) != 0.0 && tc.u2(i, j) != 1.0)
                throw NumericalError("rotate_spectrum: U2 is not a 0/1 matrix");
        }
        if (rs != 1.0 || cs != 1.0)
            throw NumericalError("rotate_spectrum: U2 is not a permutation");
    }

    tc.h2_bar = tc.u2.transpose() * tc.h2 * tc.u2;
    const double off = std::max(tc.h2_bar.block(0, D, D, D).cwiseAbs().maxCoeff(),
                                tc.h2_bar.block(D, 0, D, D).cwiseAbs().maxCoeff());
    if (off > 1e-12 * std::max(1.0, H.norm()))
        throw NumericalError("rotate_spectrum: shuffle failed to block-diagonalize H2");
    tc.h3 = tc.h2_bar.block(0, 0, D, D);
    return tc;
}

} // namespace fbse
