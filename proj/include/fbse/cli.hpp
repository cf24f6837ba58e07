#pragma once
#include <string>
#include <vector>

#include "fbse/degeneracy.hpp"
#include "fbse/model.hpp"
#include "fbse/response.hpp"

namespace fbse {

// One reproducible experiment: identical RunConfig -> byte-identical outputs.
struct RunConfig {
    std::string model = "flatband3";  // builtin name or spec-file path
    ParamSet params;
    int cells = 20;
    int kpoints = 401;
    std::vector<double> gamma1_grid, gamma2_grid;
    double eta = kDefaultEta;
    GreenMethod method = GreenMethod::FlatbandProjector;
    int source_site = 2;              // 0-based row index into the OBC basis
    std::string out_dir = ".";
    long seed = 0;
    // qdist geometry
    double delta_beta = 1e-3;
    int theta_samples = 36;
    // locus check values (exact rationals, as strings)
    std::string locus_t1 = "1";
    std::string locus_t2 = "1";
};

ModelSpec resolve_model(const RunConfig& cfg);

// Fill parameters the run did not set from the spec's declared defaults: extras
// always (they have no flags), t1/t2/gamma1/gamma2 only when listed in
// `use_default_for` (the CLI passes the flags the user left untouched).
ParamSet bind_params(const ModelSpec& spec, const ParamSet& p,
                     const std::vector<std::string>& use_default_for = {});

std::vector<double> parse_grid_axis(const std::string& text);  // "min:max:n"
Rational parse_rational(const std::string& text);              // "p/q" or decimal

// Subcommand bodies; each writes its CSVs plus manifest.json under cfg.out_dir
// and returns the list of files written.
std::vector<std::string> cmd_spectrum(const RunConfig& cfg);
std::vector<std::string> cmd_phase_map(const RunConfig& cfg);
std::vector<std::string> cmd_gbz(const RunConfig& cfg);
std::vector<std::string> cmd_ep_scan(const RunConfig& cfg);
std::vector<std::string> cmd_obc_ep_scan(const RunConfig& cfg);
std::vector<std::string> cmd_qdist(const RunConfig& cfg);
std::vector<std::string> cmd_transform(const RunConfig& cfg);
std::vector<std::string> cmd_modes(const RunConfig& cfg);
std::vector<std::string> cmd_scaling(const RunConfig& cfg);
std::vector<std::string> cmd_response(const RunConfig& cfg);
std::vector<std::string> cmd_jordan_locus(const RunConfig& cfg);
std::vector<std::string> cmd_emit_model(const RunConfig& cfg);

} // namespace fbse
