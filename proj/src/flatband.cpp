#include "fbse/flatband.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace fbse {

LocalizationReport localization_report(const CVector& v) {
    const double norm2 = v.squaredNorm();
    if (norm2 == 0.0) throw PreconditionError("localization_report: zero vector");
    LocalizationReport r;
    double com = 0.0, quart = 0.0;
    for (int n = 0; n < v.size(); ++n) {
        const double w = std::norm(v[n]);
        com += (n + 1) * w;
        quart += w * w;
        if (std::abs(v[n]) > r.max_abs) {
            r.max_abs = std::abs(v[n]);
            r.argmax_site = n + 1;
        }
    }
    r.center_of_mass = com / norm2;
    r.participation_ratio = norm2 * norm2 / quart;
    return r;
}

namespace {

// Kernel of M as orthonormal columns (last right singular vectors).
CMatrix svd_kernel(const CMatrix& M, double tol, int* out_dim = nullptr) {
    Eigen::JacobiSVD<CMatrix> svd(M, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    int dim = 0;
    for (int i = static_cast<int>(sv.size()) - 1; i >= 0; --i) {
        if (sv[i] < tol * smax) ++dim;
        else break;
    }
    if (out_dim) *out_dim = dim;
    return svd.matrixV().rightCols(dim);
}

CMatrix order_by_com(CMatrix basis) {
    const int m = static_cast<int>(basis.cols());
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> com(m);
    for (int j = 0; j < m; ++j) com[j] = localization_report(basis.col(j)).center_of_mass;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return com[a] < com[b]; });
    CMatrix out(basis.rows(), m);
    for (int j = 0; j < m; ++j) out.col(j) = basis.col(order[j]);
    return out;
}

} // namespace

CMatrix flatband_revs(const CMatrix& H, double tol, int expected_dim) {
    if (expected_dim < 0) expected_dim = static_cast<int>(H.rows()) / 3;
    int dim = 0;
    CMatrix V0 = svd_kernel(H, tol, &dim);
    if (expected_dim == 0 && dim == 0)
        throw DegeneracyAnomalyError("flatband_revs: empty null space", 0, 0);
    if (expected_dim > 0 && dim != expected_dim) {
        std::ostringstream msg;
        msg << "flatband_revs: null-space dimension " << dim << " != expected " << expected_dim
            << " (degeneracy anomaly / special parameter locus)";
        throw DegeneracyAnomalyError(msg.str(), expected_dim, dim);
    }
    // localized orthonormal basis of range(P): column-pivoted QR on P = V0 V0^dag
    CMatrix P = V0 * V0.adjoint();
    Eigen::ColPivHouseholderQR<CMatrix> qr(P);
    CMatrix Q = qr.householderQ() * CMatrix::Identity(H.rows(), dim);
    return order_by_com(std::move(Q));
}

CMatrix biorthogonal_levs(const CMatrix& revs, const CMatrix& H, double tol) {
    const int r = static_cast<int>(revs.cols());
    int dim = 0;
    CMatrix L0 = svd_kernel(H.adjoint(), tol, &dim);
    if (dim != r)
        throw DegeneracyAnomalyError("biorthogonal_levs: left null-space dimension mismatch", r, dim);
    CMatrix M = L0.adjoint() * revs;  // r x r
    Eigen::FullPivLU<CMatrix> lu(M);
    if (!lu.isInvertible())
        throw NumericalError("biorthogonal_levs: flat-band left/right subspaces orthogonal");
    return L0 * lu.inverse().adjoint();
}

CMatrix cls_basis(const ParamSet& p, int cells) {
    if (p.t2 == p.gamma2)
        throw PreconditionError(
            "cls_basis: t2 = gamma2 (unidirectional C-coupling: CLS support degenerates)");
    const double denom = p.t2 - p.gamma2;
    const double u = -(p.t1 - p.gamma1) / denom;
    const double v = -p.t2 / denom;
    const int D = 3 * cells;
    CMatrix C = CMatrix::Zero(D, cells);
    for (int n = 0; n < cells; ++n) {
        C(3 * n + 1, n) = 1.0;
        C(3 * n + 2, n) = u;
        if (n > 0) C(3 * (n - 1) + 2, n) = v;
    }
    const CMatrix H = obc_hamiltonian(builtin_flatband3(), p, cells);
    for (int n = 0; n < cells; ++n) {
        const double resid = (H * C.col(n)).norm() / C.col(n).norm();
        if (resid > 1e-12) {
            std::ostringstream msg;
            msg << "cls_basis: state " << n << " fails the zero-mode condition (residual " << resid
                << ")";
            throw NumericalError(msg.str());
        }
    }
    return C;
}

CMatrix builtin_right_kernel(const ParamSet& p, int cells) {
    const int D = 3 * cells;
    if (p.t2 == p.gamma2) {
        if (p.t1 == p.gamma1)
            throw DegeneracyAnomalyError(
                "builtin_right_kernel: t1 = gamma1 and t2 = gamma2 (kernel dimension N+1)", cells,
                cells + 1);
        // C columns of H vanish: pure C-site zero modes
        CMatrix C = CMatrix::Zero(D, cells);
        for (int n = 0; n < cells; ++n) C(3 * n + 2, n) = 1.0;
        return C;
    }
    CMatrix C = cls_basis(p, cells);
    for (int n = 0; n < cells; ++n) C.col(n).normalize();
    return C;
}

CMatrix builtin_left_kernel(const ParamSet& p, int cells) {
    const int D = 3 * cells;
    if (p.t2 == -p.gamma2) {
        // C rows of H vanish: pure C-site left zero modes
        CMatrix L = CMatrix::Zero(D, cells);
        for (int n = 0; n < cells; ++n) L(3 * n + 2, n) = 1.0;
        return L;
    }
    // mirror CLS family: left kernel of H = right kernel of H^T = CLS at gamma -> -gamma
    const double denom = p.t2 + p.gamma2;
    const double u = -(p.t1 + p.gamma1) / denom;
    const double v = -p.t2 / denom;
    CMatrix L = CMatrix::Zero(D, cells);
    for (int n = 0; n < cells; ++n) {
        L(3 * n + 1, n) = 1.0;
        L(3 * n + 2, n) = u;
        if (n > 0) L(3 * (n - 1) + 2, n) = v;
        L.col(n).normalize();
    }
    return L;
}

ModeBasis mode_basis_svd(const CMatrix& H, double tol, int expected_dim) {
    ModeBasis mb;
    mb.revs = flatband_revs(H, tol, expected_dim);
    mb.levs = biorthogonal_levs(mb.revs, H, tol);
    return mb;
}

ModeBasis mode_basis_analytic(const ParamSet& p, int cells) {
    CMatrix C = builtin_right_kernel(p, cells);
    CMatrix L = builtin_left_kernel(p, cells);
    CMatrix M = L.adjoint() * C;
    Eigen::PartialPivLU<CMatrix> lu(M);
    ModeBasis mb;
    mb.revs = std::move(C);
    mb.levs = L * lu.inverse().adjoint();
    const double resid =
        (mb.levs.adjoint() * mb.revs - CMatrix::Identity(cells, cells)).cwiseAbs().maxCoeff();
    if (!std::isfinite(resid) || resid > 1e-6)
        throw NumericalError(
            "mode_basis_analytic: pairing matrix too ill-conditioned for a full dual basis");
    return mb;
}

ModeBasis flatband_basis(const ModelSpec& spec, const ParamSet& p, int cells) {
    if (spec.is_builtin_flatband3()) return mode_basis_analytic(p, cells);
    // user models: take whatever null space is found (dimension unknown a priori)
    return mode_basis_svd(obc_hamiltonian(spec, p, cells), 1e-10, 0);
}

CVector builtin_projector_apply(const ParamSet& p, int cells, const CVector& s) {
    const CMatrix C = builtin_right_kernel(p, cells);
    const CMatrix L = builtin_left_kernel(p, cells);
    const CMatrix M = L.adjoint() * C;
    return C * Eigen::PartialPivLU<CMatrix>(M).solve(L.adjoint() * s);
}

} // namespace fbse
