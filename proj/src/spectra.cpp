#include "fbse/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace fbse {

double Spectrum::max_residual() const {
    double m = 0.0;
    for (double r : residuals) m = std::max(m, r);
    return m;
}

Spectrum eig_general(const CMatrix& H, bool compute_vectors) {
    if (H.rows() != H.cols()) throw PreconditionError("eig_general: matrix not square");
    if (!H.allFinite()) throw PreconditionError("eig_general: non-finite entries");

    Eigen::ComplexEigenSolver<CMatrix> es(H, compute_vectors);
    if (es.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "eig_general: eigensolver failed to converge (info=" << es.info()
            << ", dim=" << H.rows() << ")";
        throw NumericalError(msg.str());
    }

    const int n = static_cast<int>(H.rows());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto& ev = es.eigenvalues();
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (ev[a].real() != ev[b].real()) return ev[a].real() < ev[b].real();
        return ev[a].imag() < ev[b].imag();
    });

    Spectrum s;
    s.values.resize(n);
    for (int i = 0; i < n; ++i) s.values[i] = ev[order[i]];
    if (compute_vectors) {
        s.vectors.resize(n, n);
        s.residuals.resize(n);
        for (int i = 0; i < n; ++i) {
            CVector v = es.eigenvectors().col(order[i]);
            s.vectors.col(i) = v;
            s.residuals[i] = (H * v - s.values[i] * v).norm() / v.norm();
        }
    }
    return s;
}

std::vector<std::pair<int, int>> defective_pairs(const Spectrum& s, double value_tol,
                                                 double overlap_tol) {
    std::vector<std::pair<int, int>> out;
    if (!s.has_vectors()) return out;
    const int n = static_cast<int>(s.values.size());
    double scale = 0.0;
    for (const auto& v : s.values) scale = std::max(scale, std::abs(v));
    scale = std::max(scale, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(s.values[i] - s.values[j]) > value_tol * scale) continue;
            double ov = std::abs(s.vectors.col(i).dot(s.vectors.col(j))) /
                        (s.vectors.col(i).norm() * s.vectors.col(j).norm());
            if (ov > 1.0 - overlap_tol) out.emplace_back(i, j);
        }
    return out;
}

bool TrackedBands::is_flat(int b, double tol) const {
    for (const auto& e : bands[static_cast<size_t>(b)])
        if (std::abs(e) > tol) return false;
    return true;
}

TrackedBands pbc_bands(const ModelSpec& spec, const ParamSet& p, int k_count) {
    if (k_count < 64) throw PreconditionError("pbc_bands: k_count must be >= 64");
    const int B = spec.bands;
    TrackedBands tb;
    tb.ks.resize(k_count);
    tb.bands.assign(B, {});
    for (auto& b : tb.bands) b.reserve(k_count);

    std::vector<Complex> prev(B);
    CMatrix prev_vecs;
    for (int j = 0; j < k_count; ++j) {
        const double k = 2.0 * kPi * j / (k_count - 1);  // inclusive grid, closure sample at 2pi
        tb.ks[j] = k;
        Spectrum s = eig_general(bloch_hamiltonian(spec, p, k), true);
        if (j == 0) {
            for (int b = 0; b < B; ++b) {
                tb.bands[b].push_back(s.values[b]);
                prev[b] = s.values[b];
            }
            prev_vecs = s.vectors;
            continue;
        }
        // greedy global-min matching of new eigenvalues to previous band heads
        struct Cand { double d; int band; int idx; };
        std::vector<Cand> cands;
        cands.reserve(static_cast<size_t>(B) * B);
        for (int b = 0; b < B; ++b)
            for (int i = 0; i < B; ++i)
                cands.push_back({std::abs(prev[b] - s.values[i]), b, i});
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.d < b.d; });
        std::vector<int> pick(B, -1);
        std::vector<bool> used(B, false);
        for (size_t c = 0; c < cands.size(); ++c) {
            const auto& [d, b, i] = cands[c];
            if (pick[b] >= 0 || used[i]) continue;
            // tie within 1e-12: prefer the candidate with larger eigenvector overlap
            int best = i;
            if (c + 1 < cands.size()) {
                for (size_t c2 = c + 1; c2 < cands.size() && cands[c2].d - d < 1e-12; ++c2) {
                    if (cands[c2].band != b || used[cands[c2].idx]) continue;
                    double ov_best = std::abs(prev_vecs.col(b).dot(s.vectors.col(best)));
                    double ov_alt = std::abs(prev_vecs.col(b).dot(s.vectors.col(cands[c2].idx)));
                    if (ov_alt > ov_best) {
                        std::ostringstream w;
                        w << "tracking tie at k=" << tb.ks[j] << " band " << b
                          << ": broken by eigenvector overlap";
                        tb.warnings.push_back(w.str());
                        best = cands[c2].idx;
                    }
                }
            }
            pick[b] = best;
            used[best] = true;
        }
        CMatrix new_vecs(s.vectors.rows(), B);
        for (int b = 0; b < B; ++b) {
            tb.bands[b].push_back(s.values[pick[b]]);
            prev[b] = s.values[pick[b]];
            new_vecs.col(b) = s.vectors.col(pick[b]);
        }
        prev_vecs = new_vecs;
    }
    return tb;
}

Complex dispersive_energy_squared(const ParamSet& p, double k) {
    const double d = p.t1 * p.t1 + 2.0 * p.t2 * p.t2 + 2.0 * p.t1 * p.t2 * std::cos(k);
    return Complex(d - (p.gamma1 * p.gamma1 + p.gamma2 * p.gamma2),
                   -2.0 * p.gamma1 * p.t2 * std::sin(k));
}

std::string RegionLabel::to_string() const {
    switch (label) {
        case Label::I: return "I";
        case Label::II: return "II";
        case Label::III: return "III";
        default: return "boundary";
    }
}

RegionLabel region_classify(const ParamSet& p) {
    const double d0 = p.t1 * p.t1 + 2.0 * p.t2 * p.t2 + 2.0 * p.t1 * p.t2;
    const double dpi = p.t1 * p.t1 + 2.0 * p.t2 * p.t2 - 2.0 * p.t1 * p.t2;
    RegionLabel r{};
    r.threshold_low = std::min(d0, dpi);
    r.threshold_high = std::max(d0, dpi);
    const double s = p.gamma1 * p.gamma1 + p.gamma2 * p.gamma2;
    const double eps = 1e-12 * std::max(1.0, r.threshold_high);
    if (std::abs(s - r.threshold_low) <= eps || std::abs(s - r.threshold_high) <= eps)
        r.label = RegionLabel::Label::Boundary;
    else if (s < r.threshold_low)
        r.label = RegionLabel::Label::I;
    else if (s < r.threshold_high)
        r.label = RegionLabel::Label::II;
    else
        r.label = RegionLabel::Label::III;
    return r;
}

namespace {

double winding_of(const std::vector<Complex>& curve, Complex e_ref) {
    double total = 0.0;
    for (size_t i = 0; i + 1 < curve.size(); ++i) {
        const Complex a = curve[i] - e_ref;
        const Complex b = curve[i + 1] - e_ref;
        total += std::arg(b / a);
    }
    return total / (2.0 * kPi);
}

} // namespace

EnclosureResult pointgap_encloses(const TrackedBands& tb, Complex e_ref) {
    std::vector<const std::vector<Complex>*> disp;
    for (int b = 0; b < tb.band_count(); ++b)
        if (!tb.is_flat(b)) disp.push_back(&tb.bands[static_cast<size_t>(b)]);

    for (const auto* band : disp)
        for (const auto& e : *band)
            if (std::abs(e - e_ref) < 1e-9)
                throw PreconditionError(
                    "pointgap_encloses: E_ref lies on a sampled eigenvalue; perturb E_ref");

    double total = 0.0;
    std::vector<bool> consumed(disp.size(), false);
    for (size_t b = 0; b < disp.size(); ++b) {
        if (consumed[b]) continue;
        const auto& cur = *disp[b];
        if (std::abs(cur.back() - cur.front()) < 1e-6) {
            total += winding_of(cur, e_ref);  // closes onto itself over 2pi
            consumed[b] = true;
            continue;
        }
        // branches swapped across the zone: join with the partner loop (period 4pi)
        std::vector<Complex> joined = cur;
        consumed[b] = true;
        for (size_t b2 = 0; b2 < disp.size(); ++b2) {
            if (consumed[b2]) continue;
            if (std::abs(disp[b2]->front() - cur.back()) < 1e-6) {
                joined.insert(joined.end(), disp[b2]->begin(), disp[b2]->end());
                consumed[b2] = true;
                break;
            }
        }
        joined.push_back(cur.front());
        total += winding_of(joined, e_ref);
    }
    const int w = static_cast<int>(std::lround(total));
    if (std::abs(total - w) > 1e-6)
        throw NumericalError("pointgap_encloses: winding sum not an integer");
    return {w != 0, w};
}

} // namespace fbse
