#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "fbse/cli.hpp"
#include "fbse/errors.hpp"

using namespace fbse;

int main(int argc, char** argv) {
    CLI::App app{"fbse - non-Hermitian flat-band lattice toolkit"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string grid_text, method_text = "flat-band-projector";
    bool hermitian = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--model", cfg.model, "builtin name or model-spec JSON path");
        sub->add_option("--t1", cfg.params.t1, "reciprocal hopping t1");
        sub->add_option("--t2", cfg.params.t2, "reciprocal hopping t2");
        sub->add_option("--gamma1", cfg.params.gamma1, "non-reciprocal strength gamma1");
        sub->add_option("--gamma2", cfg.params.gamma2, "non-reciprocal strength gamma2");
        sub->add_option("--cells", cfg.cells, "unit cells N");
        sub->add_option("--kpoints", cfg.kpoints, "k-grid size");
        sub->add_option("--grid", grid_text, "gamma grid 'g1min:g1max:n,g2min:g2max:n'");
        sub->add_option("--eta", cfg.eta, "probe offset eta (E = i eta)");
        sub->add_option("--method", method_text, "direct-inverse | flat-band-projector");
        sub->add_option("--source-site", cfg.source_site, "0-based source site index");
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--seed", cfg.seed, "seed recorded in the manifest");
        sub->add_flag("--hermitian", hermitian, "set gamma1 = gamma2 = 0");
    };

    std::map<std::string, std::function<std::vector<std::string>(const RunConfig&)>> dispatch;
    auto make = [&](const char* name, const char* desc, auto fn) {
        CLI::App* sub = app.add_subcommand(name, desc);
        add_common(sub);
        dispatch[name] = fn;
        return sub;
    };

    make("spectrum", "PBC bands and OBC spectrum -> spectrum.csv", cmd_spectrum);
    make("phase-map", "chi over the gamma plane -> chi_map.csv, boundaries.csv", cmd_phase_map);
    make("gbz", "dispersive-band GBZ samples -> gbz.csv", cmd_gbz);
    make("ep-scan", "EP3 window along gamma2 -> ep3.csv", cmd_ep_scan);
    make("obc-ep-scan", "OBC EP curves on the gamma plane -> ep_curves.csv", cmd_obc_ep_scan);
    CLI::App* qd = make("qdist", "quantum distances near the EP3 -> qdist.csv", cmd_qdist);
    qd->add_option("--delta-beta", cfg.delta_beta, "circle radius around the EP");
    qd->add_option("--theta-samples", cfg.theta_samples, "angular grid size");
    make("transform", "spectrum-rotating shuffle transform -> transform.csv", cmd_transform);
    make("modes", "flat-band REV/LEV profiles -> modes.csv", cmd_modes);
    make("scaling", "max |G| lattice-size scaling -> green_scaling.csv", cmd_scaling);
    make("response", "Green's-function response profile -> response.csv", cmd_response);
    CLI::App* jl = make("jordan-locus", "exact Jordan structure on t1=gamma1, t2=gamma2",
                        cmd_jordan_locus);
    jl->add_option("--locus-t1", cfg.locus_t1, "t1 = gamma1 value (rational)");
    jl->add_option("--locus-t2", cfg.locus_t2, "t2 = gamma2 value (rational)");
    make("emit-model", "write the model spec as JSON", cmd_emit_model);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (hermitian) {
            cfg.params.gamma1 = 0.0;
            cfg.params.gamma2 = 0.0;
        }
        if (!grid_text.empty()) {
            const auto comma = grid_text.find(',');
            if (comma == std::string::npos)
                throw ConfigError("--grid expects 'g1min:g1max:n,g2min:g2max:n'");
            cfg.gamma1_grid = parse_grid_axis(grid_text.substr(0, comma));
            cfg.gamma2_grid = parse_grid_axis(grid_text.substr(comma + 1));
        }
        cfg.method = parse_green_method(method_text);
        for (const auto& [name, fn] : dispatch) {
            CLI::App* sub = app.get_subcommand(name);
            if (!sub->parsed()) continue;
            // model-file defaults apply to any hopping flag the user left untouched
            if (!hermitian) {
                std::vector<std::string> untouched;
                for (const char* flag : {"t1", "t2", "gamma1", "gamma2"})
                    if (sub->count(std::string("--") + flag) == 0) untouched.emplace_back(flag);
                cfg.params = bind_params(resolve_model(cfg), cfg.params, untouched);
            }
            const auto files = fn(cfg);
            for (const auto& f : files) std::cout << "wrote " << f << "\n";
            return 0;
        }
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition violation: " << e.what() << "\n";
        return 4;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
