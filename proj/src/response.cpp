#include "fbse/response.hpp"

#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "fbse/parallel.hpp"
#include "fbse/spectra.hpp"

namespace fbse {

GreenMethod parse_green_method(const std::string& name) {
    if (name == "direct" || name == "direct-inverse") return GreenMethod::DirectInverse;
    if (name == "projector" || name == "flat-band-projector") return GreenMethod::FlatbandProjector;
    throw ConfigError("unknown Green's-function method '" + name +
                      "' (expected direct-inverse or flat-band-projector)");
}

std::string to_string(GreenMethod m) {
    return m == GreenMethod::DirectInverse ? "direct-inverse" : "flat-band-projector";
}

namespace {

CVector source_vector(Eigen::Index dim, int site) {
    if (site < 0 || site >= dim)
        throw PreconditionError("green_response: source site out of range");
    CVector s = CVector::Zero(dim);
    s[site] = 1.0;
    return s;
}

CVector normalized(CVector v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw NumericalError("green_response: response vector not normalizable");
    return v / n;
}

} // namespace

CVector green_response(const CMatrix& h_obc, const GreenProbe& probe) {
    const CVector s = source_vector(h_obc.rows(), probe.source_site);
    if (probe.method == GreenMethod::DirectInverse) {
        if (probe.e_probe == Complex(0.0, 0.0))
            throw PreconditionError(
                "green_response: singular system at eta = 0; use a nonzero eta");
        CMatrix A = -h_obc;
        A.diagonal().array() += probe.e_probe;
        Eigen::PartialPivLU<CMatrix> lu(A);
        return normalized(lu.solve(s));
    }
    return green_response(h_obc, probe, mode_basis_svd(h_obc));
}

CVector green_response(const CMatrix& h_obc, const GreenProbe& probe, const ModeBasis& basis) {
    if (probe.method == GreenMethod::DirectInverse) return green_response(h_obc, probe);
    const CVector s = source_vector(h_obc.rows(), probe.source_site);
    return normalized(basis.projector_apply(s));
}

CVector green_response_model(const ModelSpec& spec, const ParamSet& p, int cells,
                             const GreenProbe& probe) {
    if (probe.method == GreenMethod::FlatbandProjector && spec.is_builtin_flatband3()) {
        const CVector s = source_vector(3L * cells, probe.source_site);
        return normalized(builtin_projector_apply(p, cells, s));
    }
    if (probe.method == GreenMethod::FlatbandProjector) {
        const CMatrix H = obc_hamiltonian(spec, p, cells);
        return green_response(H, probe, mode_basis_svd(H, 1e-10, 0));
    }
    return green_response(obc_hamiltonian(spec, p, cells), probe);
}

double chi(const CVector& response) {
    if (std::abs(response.squaredNorm() - 1.0) > 1e-10)
        throw PreconditionError("chi: response vector not normalized");
    const auto total = static_cast<double>(response.size());
    double acc = 0.0;
    for (int n = 0; n < response.size(); ++n) acc += (n + 1) / total * std::norm(response[n]);
    return acc;
}

namespace {

// Quarter-circle gamma1^2 + gamma2^2 = s2 clipped to the grid bounding box.
Polyline boundary_circle(const std::string& name, double s2, double g1_lo, double g1_hi,
                         double g2_lo, double g2_hi) {
    Polyline poly{name, {}};
    if (s2 <= 0.0) return poly;
    const double r = std::sqrt(s2);
    const int samples = 257;
    for (int i = 0; i < samples; ++i) {
        const double th = 0.5 * kPi * i / (samples - 1);
        const double g1 = r * std::cos(th), g2 = r * std::sin(th);
        if (g1 >= g1_lo && g1 <= g1_hi && g2 >= g2_lo && g2 <= g2_hi)
            poly.points.emplace_back(g1, g2);
    }
    return poly;
}

} // namespace

ChiMap chi_map(const ModelSpec& spec, const ParamSet& base, const std::vector<double>& gamma1_grid,
               const std::vector<double>& gamma2_grid, int cells, GreenMethod method, double eta,
               int source_site) {
    if (cells < 8) throw PreconditionError("chi_map: need at least 8 unit cells");
    auto monotone = [](const std::vector<double>& g) {
        for (size_t i = 0; i + 1 < g.size(); ++i)
            if (!(g[i] < g[i + 1])) return false;
        return !g.empty();
    };
    if (!monotone(gamma1_grid) || !monotone(gamma2_grid))
        throw PreconditionError("chi_map: grids must be strictly increasing");

    ChiMap out;
    out.gamma1_grid = gamma1_grid;
    out.gamma2_grid = gamma2_grid;
    const int n1 = static_cast<int>(gamma1_grid.size());
    const int n2 = static_cast<int>(gamma2_grid.size());
    out.chi.setConstant(n1, n2, std::numeric_limits<double>::quiet_NaN());

    parallel_for(0, n1 * n2, [&](int cell) {
        const int i = cell / n2, j = cell % n2;
        ParamSet p = base;
        p.gamma1 = gamma1_grid[static_cast<size_t>(i)];
        p.gamma2 = gamma2_grid[static_cast<size_t>(j)];
        GreenProbe probe{Complex(0.0, eta), source_site, method};
        try {
            out.chi(i, j) = chi(green_response_model(spec, p, cells, probe));
        } catch (const std::exception&) {
            // failure recorded as NaN; sweep continues
        }
    });

    RegionLabel rl = region_classify(base);
    const double g1_lo = gamma1_grid.front(), g1_hi = gamma1_grid.back();
    const double g2_lo = gamma2_grid.front(), g2_hi = gamma2_grid.back();
    out.region_boundaries.push_back(
        boundary_circle("gap_close", rl.threshold_low, g1_lo, g1_hi, g2_lo, g2_hi));
    out.region_boundaries.push_back(
        boundary_circle("gap_reopen", rl.threshold_high, g1_lo, g1_hi, g2_lo, g2_hi));
    return out;
}

double log_max_projector_entry(const ModelSpec& spec, const ParamSet& p, int cells) {
    // solve-based projector: P = C M^{-1} L^dag keeps the dominant entries
    // relatively accurate at any pairing condition number, which is all the
    // log-space slope fit needs
    if (spec.is_builtin_flatband3()) {
        const CMatrix C = builtin_right_kernel(p, cells);
        const CMatrix L = builtin_left_kernel(p, cells);
        Eigen::PartialPivLU<CMatrix> lu(L.adjoint() * C);
        const CMatrix P = C * lu.solve(CMatrix(L.adjoint()));
        return std::log(P.cwiseAbs().maxCoeff());
    }
    const ModeBasis mb = flatband_basis(spec, p, cells);
    const CMatrix P = mb.revs * mb.levs.adjoint();
    return std::log(P.cwiseAbs().maxCoeff());
}

ScalingResult max_green_scaling(const ModelSpec& spec, const ParamSet& p,
                                const std::vector<int>& cells_list, double eta) {
    if (cells_list.size() < 4)
        throw PreconditionError("max_green_scaling: need at least 4 lattice sizes");
    for (size_t i = 0; i + 1 < cells_list.size(); ++i)
        if (cells_list[i] >= cells_list[i + 1])
            throw PreconditionError("max_green_scaling: sizes must be strictly increasing");
    std::vector<double> raw(cells_list.size());
    for (size_t i = 0; i < cells_list.size(); ++i)
        raw[i] = log_max_projector_entry(spec, p, cells_list[i]);
    return fit_green_scaling(cells_list, std::move(raw), eta);
}

ScalingResult fit_green_scaling(const std::vector<int>& cells_list, std::vector<double> raw_log_max,
                                double eta) {
    ScalingResult res;
    res.cells = cells_list;
    res.log_max_g.resize(cells_list.size());
    const double log_eta = std::log(eta);
    for (size_t i = 0; i < cells_list.size(); ++i) {
        double lg = raw_log_max[i];
        if (!std::isfinite(lg)) {
            // beyond double range: extrapolate the log from the fitted growth rate
            if (i < 2) throw NumericalError("max_green_scaling: projector overflow at smallest N");
            const double rate = (res.log_max_g[i - 1] - res.log_max_g[i - 2]) /
                                (cells_list[i - 1] - cells_list[i - 2]);
            lg = res.log_max_g[i - 1] + rate * (cells_list[i] - cells_list[i - 1]) + log_eta;
            res.used_extrapolation = true;
        }
        res.log_max_g[i] = lg - log_eta;  // |G| = |P| / eta at E = i eta
    }

    const auto m = static_cast<double>(cells_list.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < cells_list.size(); ++i) {
        sx += cells_list[i];
        sy += res.log_max_g[i];
        sxx += static_cast<double>(cells_list[i]) * cells_list[i];
        sxy += cells_list[i] * res.log_max_g[i];
    }
    res.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    res.intercept = (sy - res.slope * sx) / m;
    double ss_res = 0, ss_tot = 0;
    const double mean = sy / m;
    for (size_t i = 0; i < cells_list.size(); ++i) {
        const double pred = res.slope * cells_list[i] + res.intercept;
        ss_res += (res.log_max_g[i] - pred) * (res.log_max_g[i] - pred);
        ss_tot += (res.log_max_g[i] - mean) * (res.log_max_g[i] - mean);
    }
    res.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return res;
}

} // namespace fbse
