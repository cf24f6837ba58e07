#include "fbse/model.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace fbse {

std::map<std::string, double> ParamSet::values() const {
    std::map<std::string, double> v = extras;
    v["t1"] = t1;
    v["t2"] = t2;
    v["gamma1"] = gamma1;
    v["gamma2"] = gamma2;
    return v;
}

ModelSpec builtin_flatband3() {
    ModelSpec s;
    s.name = "flatband3";
    s.bands = 3;
    s.param_names = {"t1", "t2", "gamma1", "gamma2"};
    s.defaults = {{"t1", -1.06}, {"t2", -0.3}, {"gamma1", 0.5}, {"gamma2", 0.32}};
    auto zero = AffineExpr{};
    s.h0.assign(9, zero);
    s.tplus.assign(9, zero);
    s.tminus.assign(9, zero);
    auto E = [](const char* t) { return AffineExpr::parse(t); };
    // row A
    s.h0[0 * 3 + 1] = E("t1 - gamma1");
    s.h0[0 * 3 + 2] = E("t2 - gamma2");
    // row B
    s.h0[1 * 3 + 0] = E("t1 + gamma1");
    // row C
    s.h0[2 * 3 + 0] = E("t2 + gamma2");
    // inter-cell: e^{ik} on (B,A), e^{-ik} on (A,B)
    s.tplus[1 * 3 + 0] = E("t2");
    s.tminus[0 * 3 + 1] = E("t2");
    return s;
}

EvaluatedBlocks evaluate_blocks(const ModelSpec& spec, const ParamSet& p) {
    const auto vals = p.values();
    for (const auto& [name, v] : vals)
        if (!std::isfinite(v))
            throw PreconditionError("parameter '" + name + "' is not finite");
    const int B = spec.bands;
    EvaluatedBlocks out{RMatrix::Zero(B, B), RMatrix::Zero(B, B), RMatrix::Zero(B, B)};
    for (int r = 0; r < B; ++r)
        for (int c = 0; c < B; ++c) {
            out.h0(r, c) = spec.at(spec.h0, r, c).eval(vals);
            out.tplus(r, c) = spec.at(spec.tplus, r, c).eval(vals);
            out.tminus(r, c) = spec.at(spec.tminus, r, c).eval(vals);
        }
    return out;
}

CMatrix bloch_hamiltonian(const ModelSpec& spec, const ParamSet& p, double k) {
    const auto blk = evaluate_blocks(spec, p);
    const Complex eik = std::exp(Complex(0.0, k));
    return blk.h0.cast<Complex>() + blk.tplus.cast<Complex>() * eik +
           blk.tminus.cast<Complex>() * std::conj(eik);
}

CMatrix nonbloch_hamiltonian(const ModelSpec& spec, const ParamSet& p, Complex beta) {
    if (beta == Complex(0.0, 0.0))
        throw PreconditionError("nonbloch_hamiltonian: beta = 0 (beta^{-1} singular)");
    const auto blk = evaluate_blocks(spec, p);
    return blk.h0.cast<Complex>() + blk.tplus.cast<Complex>() * beta +
           blk.tminus.cast<Complex>() * (Complex(1.0, 0.0) / beta);
}

CMatrix obc_hamiltonian(const ModelSpec& spec, const ParamSet& p, int cells) {
    if (cells < 2) throw PreconditionError("obc_hamiltonian: need at least 2 unit cells");
    const auto blk = evaluate_blocks(spec, p);
    const int B = spec.bands;
    const int D = B * cells;
    CMatrix H = CMatrix::Zero(D, D);
    for (int n = 0; n < cells; ++n)
        H.block(B * n, B * n, B, B) = blk.h0.cast<Complex>();
    for (int n = 0; n + 1 < cells; ++n) {
        H.block(B * (n + 1), B * n, B, B) = blk.tplus.cast<Complex>();
        H.block(B * n, B * (n + 1), B, B) = blk.tminus.cast<Complex>();
    }
    return H;
}

CMatrix pbc_ring_hamiltonian(const ModelSpec& spec, const ParamSet& p, int cells) {
    if (cells < 3) throw PreconditionError("pbc_ring_hamiltonian: need at least 3 unit cells");
    const auto blk = evaluate_blocks(spec, p);
    const int B = spec.bands;
    CMatrix H = obc_hamiltonian(spec, p, cells);
    H.block(0, B * (cells - 1), B, B) += blk.tplus.cast<Complex>();
    H.block(B * (cells - 1), 0, B, B) += blk.tminus.cast<Complex>();
    return H;
}

namespace {

using nlohmann::json;

std::vector<AffineExpr> parse_block(const json& j, const std::string& key, int bands,
                                    const std::vector<std::string>& names) {
    if (!j.contains(key)) throw ParseError("model spec: missing block '" + key + "'");
    const json& blk = j.at(key);
    if (!blk.is_array() || static_cast<int>(blk.size()) != bands)
        throw ParseError("model spec: block '" + key + "' must have " + std::to_string(bands) + " rows");
    std::vector<AffineExpr> out;
    out.reserve(static_cast<size_t>(bands) * bands);
    for (int r = 0; r < bands; ++r) {
        const json& row = blk.at(r);
        if (!row.is_array() || static_cast<int>(row.size()) != bands)
            throw ParseError("model spec: block '" + key + "' row " + std::to_string(r) +
                             " must have " + std::to_string(bands) + " entries (non-square block)");
        for (int c = 0; c < bands; ++c) {
            const json& cell = row.at(c);
            AffineExpr e;
            if (cell.is_number()) {
                e.constant = cell.get<double>();
            } else if (cell.is_string()) {
                try {
                    e = AffineExpr::parse(cell.get<std::string>());
                } catch (const ParseError& err) {
                    throw ParseError("model spec: block '" + key + "' entry (" + std::to_string(r) +
                                     "," + std::to_string(c) + "): " + err.what());
                }
            } else {
                throw ParseError("model spec: block '" + key + "' entry (" + std::to_string(r) + "," +
                                 std::to_string(c) + ") must be a number or expression string");
            }
            for (const auto& [n, coeff] : e.coeffs) {
                (void)coeff;
                if (std::find(names.begin(), names.end(), n) == names.end())
                    throw ParseError("model spec: block '" + key + "' entry (" + std::to_string(r) +
                                     "," + std::to_string(c) + ") uses unknown parameter '" + n + "'");
            }
            out.push_back(std::move(e));
        }
    }
    return out;
}

} // namespace

ModelSpec load_model_spec(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model spec: malformed JSON: ") + e.what());
    }
    ModelSpec s;
    s.name = j.value("name", std::string("user"));
    if (!j.contains("bands") || !j.at("bands").is_number_integer())
        throw ParseError("model spec: missing integer 'bands'");
    s.bands = j.at("bands").get<int>();
    if (s.bands < 1) throw ParseError("model spec: 'bands' must be positive");
    if (!j.contains("params") || !j.at("params").is_array())
        throw ParseError("model spec: missing 'params' array");
    for (const json& pj : j.at("params")) {
        if (pj.is_string()) {
            s.param_names.push_back(pj.get<std::string>());
        } else if (pj.is_object() && pj.contains("name")) {
            std::string n = pj.at("name").get<std::string>();
            s.param_names.push_back(n);
            if (pj.contains("default")) s.defaults[n] = pj.at("default").get<double>();
        } else {
            throw ParseError("model spec: each params entry must be a name or {name, default}");
        }
    }
    s.h0 = parse_block(j, "H0", s.bands, s.param_names);
    s.tplus = parse_block(j, "Tplus", s.bands, s.param_names);
    s.tminus = parse_block(j, "Tminus", s.bands, s.param_names);
    return s;
}

std::string save_model_spec(const ModelSpec& spec) {
    nlohmann::ordered_json j;
    j["name"] = spec.name;
    j["bands"] = spec.bands;
    nlohmann::ordered_json params = nlohmann::ordered_json::array();
    for (const auto& n : spec.param_names) {
        nlohmann::ordered_json pj;
        pj["name"] = n;
        auto it = spec.defaults.find(n);
        if (it != spec.defaults.end()) pj["default"] = it->second;
        params.push_back(pj);
    }
    j["params"] = params;
    auto dump_block = [&](const std::vector<AffineExpr>& blk) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (int r = 0; r < spec.bands; ++r) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (int c = 0; c < spec.bands; ++c) row.push_back(spec.at(blk, r, c).to_string());
            rows.push_back(row);
        }
        return rows;
    };
    j["H0"] = dump_block(spec.h0);
    j["Tplus"] = dump_block(spec.tplus);
    j["Tminus"] = dump_block(spec.tminus);
    return j.dump(2) + "\n";
}

} // namespace fbse
