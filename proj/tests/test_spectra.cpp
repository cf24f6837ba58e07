#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <Eigen/LU>

#include "fbse/model.hpp"
#include "fbse/spectra.hpp"

using namespace fbse;

namespace {

ParamSet params(double g1, double g2) {
    ParamSet p;
    p.gamma1 = g1;
    p.gamma2 = g2;
    return p;
}

} // namespace

TEST_CASE("eig_general: diagonal values, ordering, residuals") {
    CMatrix H = CMatrix::Zero(3, 3);
    H(0, 0) = 1.0;
    H(1, 1) = Complex(0.0, 2.0);
    H(2, 2) = -3.0;
    Spectrum s = eig_general(H, true);
    CHECK(std::abs(s.values[0] - Complex(-3.0, 0.0)) < 1e-14);
    CHECK(std::abs(s.values[1] - Complex(0.0, 2.0)) < 1e-14);
    CHECK(std::abs(s.values[2] - Complex(1.0, 0.0)) < 1e-14);
    CHECK(s.max_residual() < 1e-13);
}

TEST_CASE("eig_general: OBC flat band carries exactly N near-zero eigenvalues") {
    Spectrum s = eig_general(obc_hamiltonian(builtin_flatband3(), params(0.5, 0.32), 20));
    int zeros = 0;
    for (const auto& e : s.values)
        if (std::abs(e) < 1e-8) ++zeros;
    CHECK(zeros == 20);
}

TEST_CASE("eig_general: Jordan block flagged by the residual policy") {
    CMatrix J = CMatrix::Zero(2, 2);
    J(0, 1) = 1.0;
    Spectrum s = eig_general(J, true);
    CHECK(std::abs(s.values[0]) < 1e-7);
    CHECK(std::abs(s.values[1]) < 1e-7);
    CHECK(s.max_residual() < 1e-8);  // residuals stay small even for defective pairs
    CHECK(!defective_pairs(s).empty());

    // a clean Hermitian matrix has no defective pairs
    CMatrix D = CMatrix::Zero(2, 2);
    D(0, 0) = 1.0;
    D(1, 1) = 2.0;
    CHECK(defective_pairs(eig_general(D, true)).empty());
}

TEST_CASE("solver oracle: characteristic polynomial at returned eigenvalues") {
    std::mt19937 rng(41);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 12; ++trial) {
        CMatrix H(8, 8);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) H(i, j) = Complex(gauss(rng), gauss(rng));
        const double norm = H.operatorNorm();
        Spectrum s = eig_general(H);
        for (const auto& lam : s.values) {
            CMatrix shifted = H - lam * CMatrix::Identity(8, 8);
            CHECK(std::abs(shifted.determinant()) < 1e-6 * std::pow(norm, 8));
        }
    }
}

TEST_CASE("pbc_bands: analytic dispersive formulas and the flat band") {
    const ModelSpec spec = builtin_flatband3();
    CHECK_THROWS_AS(pbc_bands(spec, params(0.5, 0.32), 32), PreconditionError);

    // Hermitian limit: +-sqrt(Delta)
    {
        TrackedBands tb = pbc_bands(spec, params(0.0, 0.0), 101);
        int flat = -1;
        for (int b = 0; b < 3; ++b)
            if (tb.is_flat(b)) flat = b;
        REQUIRE(flat >= 0);
        for (size_t j = 0; j < tb.ks.size(); ++j) {
            const double delta = std::sqrt(1.06 * 1.06 + 2 * 0.09 +
                                           2 * (-1.06) * (-0.3) * std::cos(tb.ks[j]));
            double lo = 1e300, hi = -1e300;
            for (int b = 0; b < 3; ++b) {
                if (b == flat) continue;
                lo = std::min(lo, tb.bands[static_cast<size_t>(b)][j].real());
                hi = std::max(hi, tb.bands[static_cast<size_t>(b)][j].real());
            }
            CHECK(std::abs(lo + delta) < 1e-10);
            CHECK(std::abs(hi - delta) < 1e-10);
        }
    }

    // non-Hermitian: E^2 = f(k) from dispersive_energy_squared
    {
        const ParamSet p = params(0.5, 0.32);
        TrackedBands tb = pbc_bands(spec, p, 101);
        int flat_count = 0;
        for (int b = 0; b < 3; ++b)
            if (tb.is_flat(b)) ++flat_count;
        CHECK(flat_count == 1);
        for (int b = 0; b < 3; ++b) {
            if (tb.is_flat(b)) continue;
            for (size_t j = 0; j < tb.ks.size(); ++j) {
                const Complex e = tb.bands[static_cast<size_t>(b)][j];
                CHECK(std::abs(e * e - dispersive_energy_squared(p, tb.ks[j])) < 1e-10);
            }
        }
        // sublattice symmetry: spectrum invariant under E -> -E per k-point
        for (size_t j = 0; j < tb.ks.size(); ++j) {
            std::vector<Complex> at_k, neg;
            for (int b = 0; b < 3; ++b) {
                at_k.push_back(tb.bands[static_cast<size_t>(b)][j]);
                neg.push_back(-tb.bands[static_cast<size_t>(b)][j]);
            }
            auto key = [](const Complex& a, const Complex& b) {
                if (a.real() != b.real()) return a.real() < b.real();
                return a.imag() < b.imag();
            };
            std::sort(at_k.begin(), at_k.end(), key);
            std::sort(neg.begin(), neg.end(), key);
            for (int b = 0; b < 3; ++b) CHECK(std::abs(at_k[static_cast<size_t>(b)] -
                                                       neg[static_cast<size_t>(b)]) < 1e-10);
        }
    }
}

TEST_CASE("dispersive_energy_squared: frozen values and gamma1 = 0 realness") {
    CHECK(dispersive_energy_squared(params(0.0, 0.0), 0.0).real() == doctest::Approx(1.9396).epsilon(1e-12));
    CHECK(dispersive_energy_squared(params(0.0, 0.0), kPi).real() == doctest::Approx(0.6676).epsilon(1e-12));
    for (double k : {0.3, 1.7, 4.4})
        CHECK(dispersive_energy_squared(params(0.0, 0.9), k).imag() == 0.0);
}

TEST_CASE("region_classify: the three experimental setups and boundaries") {
    RegionLabel r1 = region_classify(params(0.62, 0.32));
    CHECK(r1.is(RegionLabel::Label::I));
    CHECK(r1.threshold_low == doctest::Approx(0.6676).epsilon(1e-12));
    CHECK(r1.threshold_high == doctest::Approx(1.9396).epsilon(1e-12));
    CHECK(region_classify(params(0.9, 0.32)).is(RegionLabel::Label::II));
    CHECK(region_classify(params(1.5, 0.66)).is(RegionLabel::Label::III));

    // exact threshold hit labels as boundary
    ParamSet pb = params(std::sqrt(0.6676), 0.0);
    CHECK(region_classify(pb).is(RegionLabel::Label::Boundary));
}

TEST_CASE("pointgap_encloses: region II winds around zero, I/III do not") {
    const ModelSpec spec = builtin_flatband3();
    auto enclosure = [&](double g1, double g2) {
        TrackedBands tb = pbc_bands(spec, params(g1, g2), 401);
        return pointgap_encloses(tb, Complex(0.0, 0.0));
    };
    CHECK(!enclosure(0.62, 0.32).enclosed);
    CHECK(!enclosure(0.5, 0.32).enclosed);
    auto e2 = enclosure(0.9, 0.32);
    CHECK(e2.enclosed);
    CHECK(std::abs(e2.winding) == 1);
    CHECK(enclosure(0.5, 1.0).enclosed);
    CHECK(!enclosure(1.5, 0.66).enclosed);

    // E_ref sitting on a sampled eigenvalue must error
    TrackedBands tb = pbc_bands(spec, params(0.5, 0.32), 401);
    int disp = tb.is_flat(0) ? 1 : 0;
    CHECK_THROWS_AS(pointgap_encloses(tb, tb.bands[static_cast<size_t>(disp)][7]),
                    PreconditionError);
}

TEST_CASE("point-gap winding agrees with the analytic classifier on a grid") {
    // 21x21 grid over [0,2]^2, excluding cells within 1e-3 of the threshold circles.
    // gamma1 = 0 is excluded too: the dispersive loops degenerate to axis segments
    // with empty interior there, so the s-interval classifier has no enclosure to
    // match (zero-area loops).
    const ModelSpec spec = builtin_flatband3();
    for (int i = 1; i <= 20; i += 2) {
        for (int j = 0; j <= 20; j += 2) {
            const double g1 = 0.1 * i, g2 = 0.1 * j;
            RegionLabel r = region_classify(params(g1, g2));
            if (r.is(RegionLabel::Label::Boundary)) continue;
            const double s = g1 * g1 + g2 * g2;
            if (std::abs(s - r.threshold_low) < 1e-3 || std::abs(s - r.threshold_high) < 1e-3)
                continue;
            TrackedBands tb = pbc_bands(spec, params(g1, g2), 201);
            CHECK(pointgap_encloses(tb, Complex(0.0, 0.0)).enclosed ==
                  r.is(RegionLabel::Label::II));
        }
    }
}

TEST_CASE("flat band tracks as the single point zero") {
    TrackedBands tb = pbc_bands(builtin_flatband3(), params(1.1, 0.7), 101);
    int flat = -1;
    for (int b = 0; b < 3; ++b)
        if (tb.is_flat(b, 1e-12)) flat = b;
    CHECK(flat >= 0);
}
