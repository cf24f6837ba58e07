#pragma once
#include <vector>

#include "fbse/model.hpp"
#include "fbse/types.hpp"

namespace fbse {

// Roots of det[H(beta) - E] = 0 restricted to the dispersive factor:
// p2 beta^2 + p1 beta + p0 with p2 = (t1-g1) t2, p1 = t1^2-g1^2+2 t2^2-g2^2-E^2,
// p0 = t2 (t1+g1). Ordered |beta1| <= |beta2|.
std::pair<Complex, Complex> beta_roots(const ParamSet& p, Complex energy);

struct GbzSample {
    Complex energy;       // OBC eigenvalue the sample was taken at
    Complex beta1, beta2;
    bool matched;         // | |beta1| - |beta2| | within tolerance (bulk mode)
};

struct GbzResult {
    double radius = 0.0;         // sqrt|(t1+g1)/(t1-g1)|, the beta-root circle
    double fitted_radius = 0.0;  // geometric mean of matched sample moduli
    double decay_ratio = 0.0;    // fitted per-cell envelope growth of OBC skin modes (oracle: 1/radius)
    std::vector<GbzSample> samples;
    bool flatband_all_plane = true;  // det H(beta) = 0 identically at E = 0
    int boundary_modes = 0;          // samples excluded by the matched-modulus test
};

// GBZ of the dispersive bands sampled on the OBC spectrum, plus the spatial
// decay-rate oracle fitted from dense OBC eigenvectors.
GbzResult gbz_dispersive(const ParamSet& p, int cells);

struct EpRecord {
    Complex beta;
    int order = 0;                   // nilpotency index of H(beta)
    std::vector<int> rank_sequence;  // ranks of H, H^2, H^3, ...
    bool on_gbz = false;
};

// Non-Bloch exceptional points of the flat band: roots of the E = 0 quadratic
// kept iff they lie on the GBZ circle, classified by nilpotency rank sequence.
std::vector<EpRecord> ep3_locations(const ParamSet& p);

// Ranks of successive powers of a (near-)nilpotent matrix, thresholded at
// tol * sigma_max(H) per power. Errors unless all eigenvalues are within tol of 0.
std::vector<int> nilpotency_rank_sequence(const CMatrix& H, double tol = 1e-8);

struct NonblochZeroMode {
    CVector rev_unit;  // unit-norm right zero mode (for d_RR)
    CVector rev_bi;    // biorthogonally normalized pair: <lev_bi | rev_bi> = 1
    CVector lev_bi;
    Complex pairing;   // raw <lev|rev> = f(beta); vanishes exactly at the EP
};

NonblochZeroMode nonbloch_zero_mode(const ParamSet& p, Complex beta);

enum class DistanceKind { LR, RR };

// Overlap-based quantum distance between the non-Bloch zero modes at the two
// points beta_ep + delta_beta * e^{i theta} and beta_ep + delta_beta * e^{i (theta+dtheta)}:
// sqrt|1 - |<psi'|psi>|^2| with biorthogonal (LR) or unit-norm right (RR) states.
double quantum_distance(const ParamSet& p, Complex beta_ep, double delta_beta, double theta,
                        double dtheta, DistanceKind kind);

} // namespace fbse
