#pragma once
#include "fbse/model.hpp"
#include "fbse/types.hpp"

namespace fbse {

// Flat-band subspace: right zero modes and their biorthogonal left partners,
// <lev_m | rev_n> = delta_mn. Columns of revs/levs aligned.
struct ModeBasis {
    CMatrix revs;
    CMatrix levs;

    int modes() const { return static_cast<int>(revs.cols()); }
    // Projector application sum_n |rev_n><lev_n| s (flat-band part of the resolvent
    // up to the 1/E_eta scalar).
    CVector projector_apply(const CVector& s) const { return revs * (levs.adjoint() * s); }
};

struct LocalizationReport {
    double center_of_mass = 0.0;  // 1-based site index
    double participation_ratio = 0.0;
    int argmax_site = 0;          // 1-based
    double max_abs = 0.0;
};

LocalizationReport localization_report(const CVector& v);

// Orthonormal localized basis of the numerical null space of H (singular values
// below tol * sigma_max). Orthonormalization by column-pivoted QR on the kernel
// projector keeps the columns CLS-like; columns ordered by center of mass.
// expected_dim: -1 means rows/3 (one flat mode per cell of the 3-band model),
// 0 accepts any nonempty null space, otherwise the exact dimension is enforced.
CMatrix flatband_revs(const CMatrix& H, double tol = 1e-10, int expected_dim = -1);

// Matched left zero modes: columns in ker H^dagger with <lev_m|rev_n> = delta.
CMatrix biorthogonal_levs(const CMatrix& revs, const CMatrix& H, double tol = 1e-10);

// Compact localized states of the built-in model, derived from the zero-mode
// conditions of the OBC chain: state n lives on {B_n, C_n, C_{n-1}} with
// amplitudes (1, -(t1-g1)/(t2-g2), -t2/(t2-g2)); the n=1 state has two sites.
// Residual ||H psi|| checked before return.
CMatrix cls_basis(const ParamSet& p, int cells);

// Exact flat-band kernels of the built-in model, both sides, column-normalized.
// Right: CLS family (pure C-site basis on the degenerate branch t2 = gamma2);
// left: the gamma -> -gamma mirror family (pure C-site at t2 = -gamma2).
CMatrix builtin_right_kernel(const ParamSet& p, int cells);
CMatrix builtin_left_kernel(const ParamSet& p, int cells);

// Biorthogonal pair via SVD kernels of H and H^dagger.
ModeBasis mode_basis_svd(const CMatrix& H, double tol = 1e-10, int expected_dim = -1);

// Biorthogonal pair from the analytic kernels (exact for the built-in model,
// stable on the t2 = +-gamma2 lines where the SVD route degenerates). Errors when
// the pairing matrix is too ill-conditioned to build the full dual basis.
ModeBasis mode_basis_analytic(const ParamSet& p, int cells);

// Dispatch: analytic pair for the built-in model, SVD pair otherwise.
ModeBasis flatband_basis(const ModelSpec& spec, const ParamSet& p, int cells);

// Flat-band projector applied to one source vector, via a single linear solve in
// the analytic kernels. Accurate deep in the FBSE regime, where the full dual
// basis (entries growing like e^{cN}) cannot be tabulated in floating point.
CVector builtin_projector_apply(const ParamSet& p, int cells, const CVector& s);

} // namespace fbse
