#pragma once
#include <map>
#include <string>
#include <vector>

#include "fbse/affine.hpp"
#include "fbse/types.hpp"

namespace fbse {

// Concrete hopping values. t1/t2 reciprocal, gamma1/gamma2 non-reciprocal;
// extras carry additional names for user-defined models.
struct ParamSet {
    double t1 = -1.06;
    double t2 = -0.3;
    double gamma1 = 0.5;
    double gamma2 = 0.32;
    std::map<std::string, double> extras;

    std::map<std::string, double> values() const;
};

// Unit-cell description: H(k) = H0 + Tplus e^{ik} + Tminus e^{-ik},
// entries affine in the named parameters. Blocks stored row-major, size bands x bands.
struct ModelSpec {
    std::string name;
    int bands = 0;
    std::vector<std::string> param_names;
    std::map<std::string, double> defaults;
    std::vector<AffineExpr> h0, tplus, tminus;

    const AffineExpr& at(const std::vector<AffineExpr>& blk, int r, int c) const {
        return blk[static_cast<size_t>(r) * bands + c];
    }
    bool operator==(const ModelSpec&) const = default;
    bool is_builtin_flatband3() const { return name == "flatband3"; }
};

ModelSpec builtin_flatband3();

// Evaluated blocks at a concrete ParamSet (real-valued by construction).
struct EvaluatedBlocks {
    RMatrix h0, tplus, tminus;
};
EvaluatedBlocks evaluate_blocks(const ModelSpec& spec, const ParamSet& p);

CMatrix bloch_hamiltonian(const ModelSpec& spec, const ParamSet& p, double k);
CMatrix nonbloch_hamiltonian(const ModelSpec& spec, const ParamSet& p, Complex beta);

// Open-boundary chain of N unit cells, cell-major site ordering (A,B,C per cell).
// Inter-cell placement: H[cell n+1, cell n] = Tplus, H[cell n, cell n+1] = Tminus,
// so a bulk eigenstate of H(beta) with per-cell factor 1/beta solves the OBC recursion.
CMatrix obc_hamiltonian(const ModelSpec& spec, const ParamSet& p, int cells);

// OBC matrix plus wrap-around blocks closing the ring.
CMatrix pbc_ring_hamiltonian(const ModelSpec& spec, const ParamSet& p, int cells);

// JSON model-spec documents (schema in README).
ModelSpec load_model_spec(const std::string& json_text);
std::string save_model_spec(const ModelSpec& spec);

} // namespace fbse
