#pragma once
#include <optional>
#include <string>
#include <vector>

#include "fbse/model.hpp"
#include "fbse/types.hpp"

namespace fbse {

// Where an eigenvalue came from: a Bloch k-point or an OBC matrix.
struct Provenance {
    enum class Kind { kpoint, obc_index } kind = Kind::obc_index;
    double k = 0.0;
    int index = 0;
};

struct Spectrum {
    std::vector<Complex> values;       // sorted by (re, im) lexicographic
    CMatrix vectors;                   // columns aligned with values; 0x0 when not requested
    std::vector<double> residuals;     // ||H v - E v|| / ||v|| per pair, when vectors present
    Provenance provenance;

    bool has_vectors() const { return vectors.cols() > 0; }
    double max_residual() const;
};

// Dense non-Hermitian eigensolver contract. Deterministic ordering.
Spectrum eig_general(const CMatrix& H, bool compute_vectors = false);

// Pairs (i, j) of near-degenerate eigenvalues whose eigenvectors are near-parallel
// (defective / Jordan-block signature at float resolution).
std::vector<std::pair<int, int>> defective_pairs(const Spectrum& s, double value_tol = 1e-6,
                                                 double overlap_tol = 1e-6);

// Bands tracked over an inclusive uniform k-grid [0, 2pi] (closure sample repeated).
struct TrackedBands {
    std::vector<double> ks;
    std::vector<std::vector<Complex>> bands;  // bands[b][j]
    std::vector<std::string> warnings;        // tie-break log

    int band_count() const { return static_cast<int>(bands.size()); }
    bool is_flat(int b, double tol = 1e-9) const;
};

TrackedBands pbc_bands(const ModelSpec& spec, const ParamSet& p, int k_count);

// f(k) with dispersive eigenvalues +-sqrt(f); built-in model formula.
Complex dispersive_energy_squared(const ParamSet& p, double k);

struct RegionLabel {
    enum class Label { I, II, III, Boundary } label;
    double threshold_low = 0.0;   // min over k in {0, pi} of Delta(k)
    double threshold_high = 0.0;  // max

    bool is(Label l) const { return label == l; }
    std::string to_string() const;
};

// Built-in model only: compares gamma1^2+gamma2^2 with the two line-gap-closing
// thresholds Delta(0), Delta(pi).
RegionLabel region_classify(const ParamSet& p);

struct EnclosureResult {
    bool enclosed;
    int winding;
};

// Polygon winding of the tracked dispersive eigenvalue loops around E_ref.
// Joins the two dispersive branches into one 4pi-periodic loop when tracking
// swaps them across the zone (odd winding of f).
EnclosureResult pointgap_encloses(const TrackedBands& tb, Complex e_ref);

} // namespace fbse
