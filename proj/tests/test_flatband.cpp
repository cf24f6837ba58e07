#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "fbse/flatband.hpp"
#include "fbse/model.hpp"

using namespace fbse;

namespace {

ParamSet params(double g1, double g2) {
    ParamSet p;
    p.gamma1 = g1;
    p.gamma2 = g2;
    return p;
}

CMatrix projector_of(const CMatrix& orthonormal_cols) {
    return orthonormal_cols * orthonormal_cols.adjoint();
}

} // namespace

TEST_CASE("flatband_revs: dimension, orthonormality, residual, localization") {
    const CMatrix H = obc_hamiltonian(builtin_flatband3(), params(0.5, 0.32), 20);
    CMatrix R = flatband_revs(H);
    CHECK(R.cols() == 20);
    CHECK((R.adjoint() * R - CMatrix::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-10);
    for (int j = 0; j < 20; ++j) CHECK((H * R.col(j)).norm() < 1e-10);
    // center-of-mass ordering
    double prev = 0.0;
    for (int j = 0; j < 20; ++j) {
        const double com = localization_report(R.col(j)).center_of_mass;
        CHECK(com >= prev);
        prev = com;
    }
}

TEST_CASE("flatband_revs stay CLS-like even in the FBSE regime") {
    for (auto [g1, g2] : {std::pair{0.9, 0.32}, {0.62, 0.32}, {1.5, 0.66}}) {
        const CMatrix H = obc_hamiltonian(builtin_flatband3(), params(g1, g2), 20);
        CMatrix R = flatband_revs(H);
        for (int j = 0; j < R.cols(); ++j)
            CHECK(localization_report(R.col(j)).participation_ratio < 10.0);
    }
}

TEST_CASE("flatband_revs signals the N+1 degeneracy locus") {
    ParamSet p;
    p.t1 = p.gamma1 = 1.0;
    p.t2 = p.gamma2 = 1.0;
    const CMatrix H = obc_hamiltonian(builtin_flatband3(), p, 4);
    CHECK_THROWS_AS(flatband_revs(H), DegeneracyAnomalyError);
}

TEST_CASE("biorthogonal_levs: pairing, residual, Hermitian limit") {
    const CMatrix H = obc_hamiltonian(builtin_flatband3(), params(0.9, 0.32), 20);
    CMatrix R = flatband_revs(H);
    CMatrix L = biorthogonal_levs(R, H);
    CHECK((L.adjoint() * R - CMatrix::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-8);
    for (int j = 0; j < 20; ++j) CHECK((L.col(j).adjoint() * H).norm() < 1e-10);

    // Hermitian: levs coincide with revs
    const CMatrix Hh = obc_hamiltonian(builtin_flatband3(), params(0.0, 0.0), 12);
    CMatrix Rh = flatband_revs(Hh);
    CMatrix Lh = biorthogonal_levs(Rh, Hh);
    CHECK((Lh - Rh).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("region II: left-edge LEV pairs with a right-edge REV") {
    const CMatrix H = obc_hamiltonian(builtin_flatband3(), params(0.9, 0.32), 20);
    CMatrix R = flatband_revs(H);
    CMatrix L = biorthogonal_levs(R, H);
    double biggest = -1.0;
    int which = -1;
    std::vector<double> log_max(20);
    for (int j = 0; j < 20; ++j) {
        const auto rep = localization_report(L.col(j));
        log_max[static_cast<size_t>(j)] = std::log(rep.max_abs);
        if (rep.max_abs > biggest) {
            biggest = rep.max_abs;
            which = j;
        }
    }
    const auto lev_rep = localization_report(L.col(which));
    const auto rev_rep = localization_report(R.col(which));
    CHECK(lev_rep.argmax_site <= 3);        // cell 1
    CHECK(rev_rep.argmax_site > 3 * 17);    // last 3 cells

    // amplitude hierarchy: the right-edge pair dominates the cell-1 pair by > 10^3
    const auto first_rep = localization_report(L.col(0));
    CHECK(biggest / first_rep.max_abs > 1e3);

    // log max_abs grows monotonically along the REV center-of-mass order
    for (int j = 0; j + 1 < 20; ++j)
        CHECK(log_max[static_cast<size_t>(j + 1)] > log_max[static_cast<size_t>(j)]);
    // positive linear growth rate (exponential amplitude growth)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int j = 0; j < 20; ++j) {
        sx += j;
        sy += log_max[static_cast<size_t>(j)];
        sxx += j * j;
        sxy += j * log_max[static_cast<size_t>(j)];
    }
    CHECK((20 * sxy - sx * sy) / (20 * sxx - sx * sx) > 0.1);
}

TEST_CASE("regions I and III: LEVs localized with their REVs") {
    for (auto [g1, g2] : {std::pair{0.62, 0.32}, {1.5, 0.66}}) {
        const CMatrix H = obc_hamiltonian(builtin_flatband3(), params(g1, g2), 20);
        CMatrix R = flatband_revs(H);
        CMatrix L = biorthogonal_levs(R, H);
        for (int j = 0; j < 20; ++j) {
            const double com_r = localization_report(R.col(j)).center_of_mass;
            const double com_l = localization_report(L.col(j)).center_of_mass;
            CHECK(std::abs(com_r - com_l) < 6.0);
        }
    }
}

TEST_CASE("cls_basis: amplitudes, support, residual, span") {
    const ParamSet p = params(0.5, 0.32);
    CMatrix C = cls_basis(p, 20);
    CHECK(C.cols() == 20);
    // amplitudes (1, -(t1-g1)/(t2-g2), -t2/(t2-g2)) = (1, -2.51613, -0.48387)
    CHECK(std::abs(C(3 * 5 + 1, 5) - 1.0) < 1e-14);
    CHECK(std::abs(C(3 * 5 + 2, 5) - Complex(-2.516129032258065, 0)) < 1e-5);
    CHECK(std::abs(C(3 * 4 + 2, 5) - Complex(-0.483870967741935, 0)) < 1e-5);
    // support: three sites per state, two for the edge state n = 1
    for (int n = 0; n < 20; ++n) {
        int support = 0;
        for (int m = 0; m < C.rows(); ++m)
            if (std::abs(C(m, n)) > 0) ++support;
        CHECK(support == (n == 0 ? 2 : 3));
    }
    // residual against the OBC matrix
    const CMatrix H = obc_hamiltonian(builtin_flatband3(), p, 20);
    for (int n = 0; n < 20; ++n) CHECK((H * C.col(n)).norm() / C.col(n).norm() < 1e-12);

    // span agreement with the SVD kernel: projector difference < 1e-8
    Eigen::HouseholderQR<CMatrix> qr(C);
    CMatrix Q = qr.householderQ() * CMatrix::Identity(C.rows(), C.cols());
    CMatrix P_cls = projector_of(Q);
    CMatrix P_svd = projector_of(flatband_revs(H));
    CHECK((P_cls - P_svd).cwiseAbs().maxCoeff() < 1e-8);

    // degenerate C-coupling
    ParamSet bad = params(0.5, -0.3);  // t2 == gamma2
    CHECK_THROWS_AS(cls_basis(bad, 10), PreconditionError);
}

TEST_CASE("CLS Gram matrix is tridiagonal, not the identity") {
    CMatrix C = cls_basis(params(0.5, 0.32), 12);
    for (int n = 0; n < C.cols(); ++n) C.col(n).normalize();
    CMatrix G = C.adjoint() * C;
    double off_tri = 0.0, first_diag = 0.0;
    for (int i = 0; i < G.rows(); ++i)
        for (int j = 0; j < G.cols(); ++j) {
            if (std::abs(i - j) > 1) off_tri = std::max(off_tri, std::abs(G(i, j)));
            if (std::abs(i - j) == 1) first_diag = std::max(first_diag, std::abs(G(i, j)));
        }
    CHECK(off_tri == 0.0);
    CHECK(first_diag > 0.1);
}

TEST_CASE("analytic kernels match the matrix null spaces") {
    for (auto [g1, g2] : {std::pair{0.9, 0.32}, {0.5, 0.3}, {1.0, 0.3}, {0.62, 0.32}}) {
        const ParamSet p = params(g1, g2);
        const CMatrix H = obc_hamiltonian(builtin_flatband3(), p, 16);
        CMatrix C = builtin_right_kernel(p, 16);
        CMatrix L = builtin_left_kernel(p, 16);
        CHECK((H * C).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((L.adjoint() * H).cwiseAbs().maxCoeff() < 1e-12);
        ModeBasis mb = mode_basis_analytic(p, 16);
        CHECK((mb.levs.adjoint() * mb.revs - CMatrix::Identity(16, 16)).cwiseAbs().maxCoeff() <
              1e-8);
    }
}

TEST_CASE("localization_report basics") {
    CVector e5 = CVector::Zero(12);
    e5[4] = 1.0;
    auto rep = localization_report(e5);
    CHECK(rep.center_of_mass == doctest::Approx(5.0));
    CHECK(rep.participation_ratio == doctest::Approx(1.0));
    CHECK(rep.argmax_site == 5);
    CHECK(rep.max_abs == doctest::Approx(1.0));

    CVector uni = CVector::Constant(60, 0.5);
    CHECK(localization_report(uni).participation_ratio == doctest::Approx(60.0));

    CHECK_THROWS_AS(localization_report(CVector::Zero(4)), PreconditionError);
}
