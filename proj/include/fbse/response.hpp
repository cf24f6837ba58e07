#pragma once
#include <string>
#include <vector>

#include "fbse/flatband.hpp"
#include "fbse/model.hpp"
#include "fbse/types.hpp"

namespace fbse {

enum class GreenMethod { DirectInverse, FlatbandProjector };

GreenMethod parse_green_method(const std::string& name);
std::string to_string(GreenMethod m);

// Probe for the OBC Green's function G(E) = (E - H)^{-1}. Default energy i*eta
// just off the flat band; source is a unit basis vector (0-based site index).
struct GreenProbe {
    Complex e_probe{0.0, 1e-8};
    int source_site = 2;  // C-site of cell 1
    GreenMethod method = GreenMethod::FlatbandProjector;
};

inline constexpr double kDefaultEta = 1e-8;

// Normalized spatial response |R> = G(E)|s> / ||...||.
// DirectInverse solves the linear system; FlatbandProjector applies the
// flat-band part of the Lehmann representation (the eta -> 0 limit direction).
CVector green_response(const CMatrix& h_obc, const GreenProbe& probe);
CVector green_response(const CMatrix& h_obc, const GreenProbe& probe, const ModeBasis& basis);

// Model-aware dispatch: single-solve analytic projector for the built-in model
// (stable deep in the FBSE regime), SVD pair for user models, direct otherwise.
CVector green_response_model(const ModelSpec& spec, const ParamSet& p, int cells,
                             const GreenProbe& probe);

// chi = sum_n (n / 3N) |R_n|^2 for a normalized response: the intensity-weighted
// mean site index, rescaled to (0, 1].
double chi(const CVector& response);

struct Polyline {
    std::string name;
    std::vector<std::pair<double, double>> points;  // (gamma1, gamma2)
};

struct ChiMap {
    std::vector<double> gamma1_grid, gamma2_grid;
    RMatrix chi;  // chi(i, j) at (gamma1_grid[i], gamma2_grid[j]); NaN on per-cell failure
    std::vector<Polyline> region_boundaries;
};

ChiMap chi_map(const ModelSpec& spec, const ParamSet& base, const std::vector<double>& gamma1_grid,
               const std::vector<double>& gamma2_grid, int cells,
               GreenMethod method = GreenMethod::FlatbandProjector, double eta = kDefaultEta,
               int source_site = 2);

struct ScalingResult {
    std::vector<int> cells;
    std::vector<double> log_max_g;  // ln max_{mn} |G(i eta)_{mn}|, flat-band projector
    double slope = 0.0;             // least-squares slope vs N
    double intercept = 0.0;
    double r_squared = 0.0;
    bool used_extrapolation = false;  // direct values exceeded double range
};

ScalingResult max_green_scaling(const ModelSpec& spec, const ParamSet& p,
                                const std::vector<int>& cells_list, double eta = kDefaultEta);

// Fit stage of max_green_scaling: raw ln max |P| values per size, with non-finite
// entries (double overflow) replaced by log-space extrapolation of the growth rate.
ScalingResult fit_green_scaling(const std::vector<int>& cells_list,
                                std::vector<double> raw_log_max, double eta);

// ln of the largest flat-band projector entry (the N-dependence of max |G|).
double log_max_projector_entry(const ModelSpec& spec, const ParamSet& p, int cells);

} // namespace fbse
