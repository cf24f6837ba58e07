#include "fbse/nonbloch.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "fbse/spectra.hpp"

namespace fbse {

std::pair<Complex, Complex> beta_roots(const ParamSet& p, Complex energy) {
    const Complex p2 = (p.t1 - p.gamma1) * p.t2;
    const Complex p0 = p.t2 * (p.t1 + p.gamma1);
    if (p2 == Complex(0.0, 0.0))
        throw PreconditionError("beta_roots: degenerate polynomial (t2 = 0 or t1 = gamma1)");
    const Complex p1 = p.t1 * p.t1 - p.gamma1 * p.gamma1 + 2.0 * p.t2 * p.t2 -
                       p.gamma2 * p.gamma2 - energy * energy;
    const Complex disc = std::sqrt(p1 * p1 - 4.0 * p2 * p0);
    // sign chosen to avoid cancellation in q = -(p1 + sgn * disc)/2
    const Complex q = (std::real(std::conj(p1) * disc) >= 0.0) ? -0.5 * (p1 + disc)
                                                               : -0.5 * (p1 - disc);
    Complex b1, b2;
    if (q == Complex(0.0, 0.0)) {
        b1 = b2 = Complex(0.0, 0.0);  // p1 = disc = 0; p0 must be 0 too, excluded by p2,p0 != 0
    } else {
        b1 = q / p2;
        b2 = p0 / q;
    }
    if (std::abs(b1) > std::abs(b2)) std::swap(b1, b2);
    return {b1, b2};
}

namespace {

// Geometric per-cell growth of |psi| envelopes, least squares on interior cells.
double envelope_ratio(const CVector& v, int cells) {
    const int lo = std::min(5, cells / 4), hi = cells - lo;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int c = lo; c < hi; ++c) {
        const double w = v.segment(3 * c, 3).norm();
        if (w <= 0.0) continue;
        const double y = std::log(w);
        sx += c; sy += y; sxx += static_cast<double>(c) * c; sxy += c * y;
        ++m;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return std::exp(slope);
}

} // namespace

GbzResult gbz_dispersive(const ParamSet& p, int cells) {
    if (cells < 20) throw PreconditionError("gbz_dispersive: need at least 20 unit cells");
    GbzResult out;
    out.radius = std::sqrt(std::abs((p.t1 + p.gamma1) / (p.t1 - p.gamma1)));

    const CMatrix H = obc_hamiltonian(builtin_flatband3(), p, cells);
    const Spectrum s = eig_general(H, true);
    double log_acc = 0.0;
    int matched_count = 0;
    double decay_acc = 0.0;
    int decay_count = 0;
    for (size_t i = 0; i < s.values.size(); ++i) {
        const Complex e = s.values[i];
        if (std::abs(e) < 1e-8) continue;  // flat band: GBZ covers the whole beta plane
        auto [b1, b2] = beta_roots(p, e);
        GbzSample sample{e, b1, b2, true};
        if (std::abs(std::abs(b1) - std::abs(b2)) > 1e-4 * out.radius) {
            sample.matched = false;  // boundary mode, excluded from the radius fit
            ++out.boundary_modes;
        } else {
            log_acc += 0.5 * (std::log(std::abs(b1)) + std::log(std::abs(b2)));
            ++matched_count;
            decay_acc += std::log(envelope_ratio(s.vectors.col(static_cast<int>(i)), cells));
            ++decay_count;
        }
        out.samples.push_back(sample);
    }
    out.fitted_radius = matched_count > 0 ? std::exp(log_acc / matched_count) : 0.0;
    out.decay_ratio = decay_count > 0 ? std::exp(decay_acc / decay_count) : 0.0;
    return out;
}

std::vector<int> nilpotency_rank_sequence(const CMatrix& H, double tol) {
    const int n = static_cast<int>(H.rows());
    const Spectrum s = eig_general(H, false);
    const double smax = H.norm() > 0.0
                            ? Eigen::JacobiSVD<CMatrix>(H).singularValues()[0]
                            : 0.0;
    // computed eigenvalues of a Jordan chain scatter at O(eps^{1/n}); allow that
    const double eig_tol = std::max(tol, 10.0 * std::pow(2.22e-16, 1.0 / n));
    for (const auto& e : s.values)
        if (std::abs(e) > eig_tol * std::max(smax, 1.0))
            throw PreconditionError(
                "nilpotency_rank_sequence: eigenvalues not all within tol of zero");
    std::vector<int> seq;
    if (smax == 0.0) {
        seq.push_back(0);
        return seq;
    }
    CMatrix power = CMatrix::Identity(n, n);
    for (int k = 1; k <= n; ++k) {
        power = power * H;
        Eigen::JacobiSVD<CMatrix> svd(power);
        const auto& sv = svd.singularValues();
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv[i] > tol * smax) ++rank;
        seq.push_back(rank);
        if (rank == 0) break;
    }
    if (seq.back() != 0)
        throw PreconditionError(
            "nilpotency_rank_sequence: matrix not nilpotent within tolerance");
    return seq;
}

std::vector<EpRecord> ep3_locations(const ParamSet& p) {
    const double radius = std::sqrt(std::abs((p.t1 + p.gamma1) / (p.t1 - p.gamma1)));
    std::vector<EpRecord> out;
    if (radius == 0.0) return out;  // t1 = -gamma1: GBZ collapses onto beta = 0
    auto [b1, b2] = beta_roots(p, Complex(0.0, 0.0));
    const ModelSpec spec = builtin_flatband3();
    for (const Complex& b : {b1, b2}) {
        if (std::abs(std::abs(b) - radius) > 1e-8 * radius) continue;
        EpRecord rec;
        rec.beta = b;
        rec.on_gbz = true;
        rec.rank_sequence = nilpotency_rank_sequence(nonbloch_hamiltonian(spec, p, b));
        rec.order = static_cast<int>(rec.rank_sequence.size());
        out.push_back(std::move(rec));
    }
    return out;
}

namespace {

struct ModeParts {
    Complex a, b, c, d;  // H(beta) entries: row A = (0, a, b); col A = (0, c, d)^T
};

ModeParts entries_at(const ParamSet& p, Complex beta) {
    return {p.t1 - p.gamma1 + p.t2 / beta, Complex(p.t2 - p.gamma2, 0.0),
            p.t1 + p.gamma1 + p.t2 * beta, Complex(p.t2 + p.gamma2, 0.0)};
}

Complex pairing_of(const ModeParts& m) { return m.d * m.b + m.c * m.a; }

} // namespace

NonblochZeroMode nonbloch_zero_mode(const ParamSet& p, Complex beta) {
    if (beta == Complex(0.0, 0.0)) throw PreconditionError("nonbloch_zero_mode: beta = 0");
    const ModeParts m = entries_at(p, beta);
    CVector rev(3), lev(3);
    rev << Complex(0.0, 0.0), m.b, -m.a;
    lev << Complex(0.0, 0.0), std::conj(m.d), -std::conj(m.c);
    const Complex f = pairing_of(m);  // <lev|rev> before normalization
    const double scale = rev.norm() * lev.norm();
    if (std::abs(f) < 1e-12 * std::max(scale, 1.0))
        throw SelfOrthogonalityError(
            "nonbloch_zero_mode: left/right zero modes self-orthogonal (at or near an EP)");
    NonblochZeroMode out;
    out.pairing = f;
    out.rev_unit = rev / rev.norm();
    const Complex sq = std::sqrt(f);
    out.rev_bi = rev / sq;
    out.lev_bi = lev / std::conj(sq);
    return out;
}

double quantum_distance(const ParamSet& p, Complex beta_ep, double delta_beta, double theta,
                        double dtheta, DistanceKind kind) {
    if (!(delta_beta > 0.0)) throw PreconditionError("quantum_distance: delta_beta must be > 0");
    const Complex b_ref = beta_ep + delta_beta * std::exp(Complex(0.0, theta));
    const Complex b_probe = beta_ep + delta_beta * std::exp(Complex(0.0, theta + dtheta));
    const NonblochZeroMode ref = nonbloch_zero_mode(p, b_ref);
    const NonblochZeroMode probe = nonbloch_zero_mode(p, b_probe);
    double ov2;
    if (kind == DistanceKind::RR) {
        ov2 = std::norm(probe.rev_unit.dot(ref.rev_unit));
    } else {
        ov2 = std::norm(probe.lev_bi.dot(ref.rev_bi));
    }
    return std::sqrt(std::abs(1.0 - ov2));
}

} // namespace fbse
