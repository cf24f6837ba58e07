#include "fbse/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "fbse/csv.hpp"
#include "fbse/flatband.hpp"
#include "fbse/nonbloch.hpp"
#include "fbse/spectra.hpp"

namespace fbse {

namespace fs = std::filesystem;

ModelSpec resolve_model(const RunConfig& cfg) {
    if (cfg.model == "flatband3") return builtin_flatband3();
    std::ifstream in(cfg.model);
    if (!in) throw ConfigError("cannot open model spec file '" + cfg.model + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return load_model_spec(buf.str());
}

ParamSet bind_params(const ModelSpec& spec, const ParamSet& p,
                     const std::vector<std::string>& use_default_for) {
    ParamSet out = p;
    for (const auto& name : spec.param_names) {
        auto it = spec.defaults.find(name);
        if (it == spec.defaults.end()) continue;
        if (name == "t1" || name == "t2" || name == "gamma1" || name == "gamma2") {
            if (std::find(use_default_for.begin(), use_default_for.end(), name) ==
                use_default_for.end())
                continue;
            if (name == "t1") out.t1 = it->second;
            else if (name == "t2") out.t2 = it->second;
            else if (name == "gamma1") out.gamma1 = it->second;
            else out.gamma2 = it->second;
        } else if (!out.extras.count(name)) {
            out.extras[name] = it->second;
        }
    }
    return out;
}

std::vector<double> parse_grid_axis(const std::string& text) {
    double lo = 0.0, hi = 0.0;
    int n = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || n < 2 || !(lo < hi))
        throw ConfigError("bad grid axis '" + text + "' (expected min:max:n with n >= 2)");
    std::vector<double> g(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return g;
}

Rational parse_rational(const std::string& text) {
    // leading zeros would switch cpp_int's string parser into octal
    auto to_int = [](std::string s) {
        bool neg = false;
        if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
            neg = s[0] == '-';
            s.erase(0, 1);
        }
        size_t i = 0;
        while (i + 1 < s.size() && s[i] == '0') ++i;
        s.erase(0, i);
        if (s.empty()) throw ConfigError("bad rational literal");
        BigInt v(s);
        return neg ? BigInt(-v) : v;
    };
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
        const BigInt num = to_int(text.substr(0, slash));
        const BigInt den = to_int(text.substr(slash + 1));
        if (den == 0) throw ConfigError("rational with zero denominator: '" + text + "'");
        return Rational(num, den);
    }
    const auto dot = text.find('.');
    if (dot == std::string::npos) return Rational(to_int(text));
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    const size_t frac_len = text.size() - dot - 1;
    BigInt den = 1;
    for (size_t i = 0; i < frac_len; ++i) den *= 10;
    return Rational(to_int(digits), den);
}

namespace {

std::string cell(double v) { return format_double(v); }

void write_manifest(const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& files) {
    nlohmann::ordered_json j;
    j["tool"] = "fbse 0.1.0";
    j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                 "." + std::to_string(EIGEN_MINOR_VERSION);
    j["command"] = command;
    j["model"] = cfg.model;
    j["params"] = {{"t1", cfg.params.t1},
                   {"t2", cfg.params.t2},
                   {"gamma1", cfg.params.gamma1},
                   {"gamma2", cfg.params.gamma2}};
    for (const auto& [k, v] : cfg.params.extras) j["params"][k] = v;
    j["cells"] = cfg.cells;
    j["kpoints"] = cfg.kpoints;
    j["eta"] = cfg.eta;
    j["method"] = to_string(cfg.method);
    j["source_site"] = cfg.source_site;
    j["seed"] = cfg.seed;
    nlohmann::ordered_json sums;
    for (const auto& f : files) {
        std::ostringstream hex;
        hex << std::hex << fnv1a64_file(f);
        sums[fs::path(f).filename().string()] = hex.str();
    }
    j["checksums"] = sums;
    std::ofstream out(fs::path(cfg.out_dir) / "manifest.json", std::ios::binary);
    out << j.dump(2) << "\n";
}

std::string out_path(const RunConfig& cfg, const char* name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

void param_comments(CsvWriter& w, const RunConfig& cfg) {
    w.comment("model", cfg.model);
    w.comment("t1", cell(cfg.params.t1));
    w.comment("t2", cell(cfg.params.t2));
    w.comment("gamma1", cell(cfg.params.gamma1));
    w.comment("gamma2", cell(cfg.params.gamma2));
    for (const auto& [name, v] : cfg.params.extras) w.comment(name, cell(v));
    w.comment("cells", std::to_string(cfg.cells));
}

} // namespace

std::vector<std::string> cmd_spectrum(const RunConfig& cfg) {
    const ModelSpec spec = resolve_model(cfg);
    const ParamSet p = bind_params(spec, cfg.params);
    CsvWriter w(out_path(cfg, "spectrum.csv"), {"source", "k_or_index", "re_E", "im_E", "band_id"});
    param_comments(w, cfg);
    const TrackedBands tb = pbc_bands(spec, p, cfg.kpoints);
    for (int b = 0; b < tb.band_count(); ++b)
        for (size_t j = 0; j < tb.ks.size(); ++j)
            w.row({"pbc", cell(tb.ks[j]), cell(tb.bands[static_cast<size_t>(b)][j].real()),
                   cell(tb.bands[static_cast<size_t>(b)][j].imag()), std::to_string(b)});
    const Spectrum s = eig_general(obc_hamiltonian(spec, p, cfg.cells), false);
    for (size_t i = 0; i < s.values.size(); ++i)
        w.row({"obc", std::to_string(i), cell(s.values[i].real()), cell(s.values[i].imag()), "-1"});
    w.close();
    write_manifest(cfg, "spectrum", {w.path()});
    return {w.path()};
}

std::vector<std::string> cmd_phase_map(const RunConfig& cfg) {
    const ModelSpec spec = resolve_model(cfg);
    if (cfg.gamma1_grid.empty() || cfg.gamma2_grid.empty())
        throw ConfigError("phase-map requires --grid");
    const ChiMap map = chi_map(spec, bind_params(spec, cfg.params), cfg.gamma1_grid,
                               cfg.gamma2_grid, cfg.cells, cfg.method, cfg.eta, cfg.source_site);
    CsvWriter w(out_path(cfg, "chi_map.csv"), {"gamma1", "gamma2", "chi"});
    param_comments(w, cfg);
    w.comment("method", to_string(cfg.method));
    w.comment("eta", cell(cfg.eta));
    for (size_t i = 0; i < map.gamma1_grid.size(); ++i)
        for (size_t j = 0; j < map.gamma2_grid.size(); ++j)
            w.row({cell(map.gamma1_grid[i]), cell(map.gamma2_grid[j]),
                   cell(map.chi(static_cast<int>(i), static_cast<int>(j)))});
    w.close();
    CsvWriter wb(out_path(cfg, "boundaries.csv"), {"curve", "gamma1", "gamma2"});
    for (const auto& poly : map.region_boundaries)
        for (const auto& [g1, g2] : poly.points) wb.row({poly.name, cell(g1), cell(g2)});
    wb.close();
    write_manifest(cfg, "phase-map", {w.path(), wb.path()});
    return {w.path(), wb.path()};
}

std::vector<std::string> cmd_gbz(const RunConfig& cfg) {
    const GbzResult g = gbz_dispersive(cfg.params, cfg.cells);
    CsvWriter w(out_path(cfg, "gbz.csv"), {"re_beta", "im_beta", "re_E", "im_E"});
    param_comments(w, cfg);
    w.comment("radius", cell(g.radius));
    w.comment("fitted_radius", cell(g.fitted_radius));
    w.comment("decay_ratio", cell(g.decay_ratio));
    w.comment("flatband_gbz", "all-of-complex-plane");
    w.comment("boundary_modes", std::to_string(g.boundary_modes));
    for (const auto& s : g.samples) {
        if (!s.matched) continue;
        w.row({cell(s.beta1.real()), cell(s.beta1.imag()), cell(s.energy.real()),
               cell(s.energy.imag())});
        w.row({cell(s.beta2.real()), cell(s.beta2.imag()), cell(s.energy.real()),
               cell(s.energy.imag())});
    }
    w.close();
    write_manifest(cfg, "gbz", {w.path()});
    return {w.path()};
}

std::vector<std::string> cmd_ep_scan(const RunConfig& cfg) {
    // EP3 window along gamma2 at fixed gamma1
    std::vector<double> g2s = cfg.gamma2_grid;
    if (g2s.empty()) g2s = parse_grid_axis("0:2:201");
    CsvWriter w(out_path(cfg, "ep3.csv"), {"gamma1", "gamma2", "re_beta", "im_beta", "order"});
    param_comments(w, cfg);
    auto exists_at = [&](double g2) {
        ParamSet p = cfg.params;
        p.gamma2 = g2;
        return !ep3_locations(p).empty();
    };
    for (double g2 : g2s) {
        ParamSet p = cfg.params;
        p.gamma2 = g2;
        for (const auto& rec : ep3_locations(p))
            w.row({cell(p.gamma1), cell(g2), cell(rec.beta.real()), cell(rec.beta.imag()),
                   std::to_string(rec.order)});
    }
    // bisect the appearance/disappearance endpoints of the window
    std::vector<double> endpoints;
    for (size_t i = 0; i + 1 < g2s.size(); ++i) {
        bool a = exists_at(g2s[i]), b = exists_at(g2s[i + 1]);
        if (a == b) continue;
        double lo = g2s[i], hi = g2s[i + 1];
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (exists_at(mid) == a) lo = mid;
            else hi = mid;
        }
        endpoints.push_back(0.5 * (lo + hi));
    }
    for (size_t i = 0; i < endpoints.size(); ++i)
        w.comment("window_endpoint_" + std::to_string(i), cell(endpoints[i]));
    w.close();
    for (size_t i = 0; i < endpoints.size(); ++i)
        std::cout << "ep3 window endpoint " << i << ": " << format_double(endpoints[i]) << "\n";
    write_manifest(cfg, "ep-scan", {w.path()});
    return {w.path()};
}

std::vector<std::string> cmd_obc_ep_scan(const RunConfig& cfg) {
    if (cfg.gamma1_grid.empty() || cfg.gamma2_grid.empty())
        throw ConfigError("obc-ep-scan requires --grid");
    const EpScanResult scan = obc_ep_scan(cfg.params, cfg.gamma1_grid, cfg.gamma2_grid, cfg.cells);
    CsvWriter w(out_path(cfg, "ep_curves.csv"), {"gamma1", "gamma2", "min_abs_E", "is_ep"});
    param_comments(w, cfg);
    w.comment("unresolved_sign_flips", std::to_string(scan.unresolved));
    for (const auto& l : scan.loci)
        w.row({cell(l.gamma1), cell(l.gamma2), cell(l.min_abs_e),
               l.multiplicity.is_ep ? "1" : "0"});
    w.close();
    write_manifest(cfg, "obc-ep-scan", {w.path()});
    return {w.path()};
}

std::vector<std::string> cmd_qdist(const RunConfig& cfg) {
    ParamSet p = cfg.params;
    const auto recs = ep3_locations(p);
    if (recs.empty())
        throw PreconditionError("qdist: no EP3 on the GBZ at these parameters");
    Complex bep = recs.front().beta;
    for (const auto& rec : recs)
        if (rec.beta.imag() > 0.0) bep = rec.beta;  // upper-half-plane member of the pair
    CsvWriter w(out_path(cfg, "qdist.csv"), {"kind", "delta_beta", "theta", "dtheta", "value"});
    param_comments(w, cfg);
    w.comment("beta_ep_re", cell(bep.real()));
    w.comment("beta_ep_im", cell(bep.imag()));
    const int m = cfg.theta_samples;
    for (const char* kind : {"LR", "RR"}) {
        const DistanceKind dk = std::string(kind) == "LR" ? DistanceKind::LR : DistanceKind::RR;
        for (int i = 0; i < m; ++i) {
            const double dth = 2.0 * kPi * i / m;
            if (i == 0) continue;  // coincident points
            const double val = quantum_distance(p, bep, cfg.delta_beta, 0.0, dth, dk);
            w.row({kind, cell(cfg.delta_beta), cell(0.0), cell(dth), cell(val)});
        }
    }
    w.close();
    write_manifest(cfg, "qdist", {w.path()});
    return {w.path()};
}

std::vector<std::string> cmd_transform(const RunConfig& cfg) {
    const ModelSpec spec = resolve_model(cfg);
    const CMatrix H = obc_hamiltonian(spec, bind_params(spec, cfg.params), cfg.cells);
    const TransformChain tc = rotate_spectrum(H);
    Spectrum s3 = eig_general(tc.h3.cast<Complex>(), false);
    Spectrum s0 = eig_general(H, false);
    // greedy multiset matching of eig(H3) against i*eig(H)
    std::vector<Complex> target(s0.values.size());
    for (size_t i = 0; i < s0.values.size(); ++i) target[i] = Complex(0.0, 1.0) * s0.values[i];
    std::vector<bool> used(target.size(), false);
    double worst = 0.0;
    CsvWriter w(out_path(cfg, "transform.csv"), {"re_E3", "im_E3", "re_iE", "im_iE"});
    param_comments(w, cfg);
    for (const auto& e : s3.values) {
        size_t best = 0;
        double bd = -1.0;
        for (size_t j = 0; j < target.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(e - target[j]);
            if (bd < 0 || d < bd) {
                bd = d;
                best = j;
            }
        }
        used[best] = true;
        worst = std::max(worst, bd);
        w.row({cell(e.real()), cell(e.imag()), cell(target[best].real()),
               cell(target[best].imag())});
    }
    w.comment("max_spectral_deviation", cell(worst));
    w.close();
    std::cout << "max |eig(H3) - i eig(H_OBC)| = " << format_double(worst) << "\n";
    write_manifest(cfg, "transform", {w.path()});
    return {w.path()};
}

std::vector<std::string> cmd_modes(const RunConfig& cfg) {
    const ModelSpec spec = resolve_model(cfg);
    const CMatrix H = obc_hamiltonian(spec, bind_params(spec, cfg.params), cfg.cells);
    CMatrix revs = flatband_revs(H);
    CMatrix levs = biorthogonal_levs(revs, H);
    CsvWriter w(out_path(cfg, "modes.csv"), {"mode_index", "site", "abs_rev", "abs_lev"});
    param_comments(w, cfg);
    for (int n = 0; n < revs.cols(); ++n)
        for (int m = 0; m < revs.rows(); ++m)
            w.row({std::to_string(n), std::to_string(m + 1), cell(std::abs(revs(m, n))),
                   cell(std::abs(levs(m, n)))});
    w.close();
    write_manifest(cfg, "modes", {w.path()});
    return {w.path()};
}

std::vector<std::string> cmd_scaling(const RunConfig& cfg) {
    const ModelSpec spec = resolve_model(cfg);
    std::vector<int> sizes;
    for (int n = 8; n <= std::max(24, cfg.cells); n += 2) sizes.push_back(n);
    const ScalingResult res = max_green_scaling(spec, bind_params(spec, cfg.params), sizes, cfg.eta);
    CsvWriter w(out_path(cfg, "green_scaling.csv"), {"N", "log_max_G"});
    param_comments(w, cfg);
    w.comment("slope", cell(res.slope));
    w.comment("r_squared", cell(res.r_squared));
    for (size_t i = 0; i < res.cells.size(); ++i)
        w.row({std::to_string(res.cells[i]), cell(res.log_max_g[i])});
    w.close();
    std::cout << "log max|G| slope vs N: " << format_double(res.slope)
              << " (R^2 = " << format_double(res.r_squared) << ")\n";
    write_manifest(cfg, "scaling", {w.path()});
    return {w.path()};
}

std::vector<std::string> cmd_response(const RunConfig& cfg) {
    const ModelSpec spec = resolve_model(cfg);
    GreenProbe probe{Complex(0.0, cfg.eta), cfg.source_site, cfg.method};
    CVector r = green_response_model(spec, bind_params(spec, cfg.params), cfg.cells, probe);
    CsvWriter w(out_path(cfg, "response.csv"), {"site", "abs_R"});
    param_comments(w, cfg);
    w.comment("chi", cell(chi(r)));
    for (int n = 0; n < r.size(); ++n) w.row({std::to_string(n + 1), cell(std::abs(r[n]))});
    w.close();
    std::cout << "chi = " << format_double(chi(r)) << "\n";
    write_manifest(cfg, "response", {w.path()});
    return {w.path()};
}

std::vector<std::string> cmd_jordan_locus(const RunConfig& cfg) {
    const Rational v1 = parse_rational(cfg.locus_t1);
    const Rational v2 = parse_rational(cfg.locus_t2);
    const JordanReport rep = jordan_special_case(v1, v2, cfg.cells);
    CsvWriter w(out_path(cfg, "multiplicity.csv"), {"lambda", "power", "dim_ker"});
    w.comment("cells", std::to_string(cfg.cells));
    w.comment("t1_eq_gamma1", cfg.locus_t1);
    w.comment("t2_eq_gamma2", cfg.locus_t2);
    auto emit = [&](const char* tag, const EigenvalueStructure& es) {
        for (size_t k = 0; k < es.kernel_dims.size(); ++k)
            w.row({tag, std::to_string(k + 1), std::to_string(es.kernel_dims[k])});
        std::cout << "lambda=" << tag << ": geometric " << es.geometric() << ", algebraic "
                  << es.algebraic() << "\n";
    };
    emit("0", rep.zero);
    emit("+t2", rep.plus_t2);
    emit("-t2", rep.minus_t2);
    w.close();
    write_manifest(cfg, "jordan-locus", {w.path()});
    return {w.path()};
}

std::vector<std::string> cmd_emit_model(const RunConfig& cfg) {
    const ModelSpec spec = resolve_model(cfg);
    fs::create_directories(cfg.out_dir);
    const std::string path = (fs::path(cfg.out_dir) / (spec.name + ".json")).string();
    std::ofstream out(path, std::ios::binary);
    out << save_model_spec(spec);
    out.close();
    write_manifest(cfg, "emit-model", {path});
    return {path};
}

} // namespace fbse
