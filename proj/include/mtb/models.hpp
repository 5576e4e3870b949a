#pragma once
// Martingale-difference constructions with exact samplers and per-step
// conditional-moment sequences.
//
// Every construction here keeps the martingale property exact rather than
// approximate: symmetric laws are sampled as magnitude times an independent
// sign, and the normalized/weighted kinds treat all magnitudes as known
// up front, so conditioning on the past only ever averages over signs.

#include <cstdint>
#include <vector>

#include "mtb/distributions.hpp"

namespace mtb {

enum class ModelKind {
    iid_subexp,        // i.i.d. increments with a finite exp-weighted second moment
    iid_moment,        // i.i.d. increments with finite power moments only
    self_normalized,   // eps_i / sqrt(sum eps^2), magnitudes revealed up front
    random_weighted,   // xi_i * |eps_i| / sqrt(sum eps^2)
    pnorm_weighted,    // xi_i * |eps_i| / (sum |eps|^p)^{1/p}
    regression_driven, // phi_i * eps_i / sqrt(sum phi^2), fixed design phi
};

struct MartingaleModel {
    ModelKind kind = ModelKind::iid_subexp;
    Distribution base = Normal{};       // increment law, or the signed factor for weighted kinds
    Distribution weight_law = Normal{}; // magnitude source for normalized/weighted kinds
    double alpha = 0.5;                 // exponent of the exp-weighted moment
    double p = 2.0;                     // power-moment order
    double delta = 0.5;                 // extra-moment slack
    int n = 0;                          // path length
    std::vector<double> design;         // regression_driven only, size n
};

const char* kind_name(ModelKind kind);
void validate(const MartingaleModel& model);

struct MartingalePath {
    std::vector<double> increments; // xi_1..xi_n
    std::vector<double> partials;   // S_0..S_n, partials[k] - partials[k-1] == increments[k-1]
    std::vector<double> weights;    // per-step weights for normalized/weighted kinds, else empty
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

// Running conditional-moment sequences along one path, each indexed k=1..n.
// For the weighted kinds, `upsilon` records the dominating sum that the
// deviation bounds actually consume (weight^2 times the unscaled base moment);
// the exact conditional expectation has no closed form and is never needed.
struct PathMoments {
    std::vector<double> quad_char; // sum of E[xi_i^2 | past]
    std::vector<double> upsilon;   // sum of E[xi_i^2 exp{(xi_i^+)^alpha} | past]; empty if divergent
    std::vector<double> xi_mom;    // sum of E[(xi_i^+)^p | past]
};

MartingalePath sample_path(const MartingaleModel& model, std::uint64_t seed,
                           std::uint64_t stream);

// per-model moment constants of the base law; compute once, reuse across paths
struct ModelConstants {
    double quad = 1.0;      // E[xi^2]
    double pos_pow = 0.5;   // E[(xi^+)^p]
    double subexp = 0.0;    // E[xi^2 exp{...^alpha}], one- or two-sided per kind
    bool has_subexp = false;
};

ModelConstants model_constants(const MartingaleModel& model);

PathMoments path_moments(const MartingaleModel& model, const MartingalePath& path);
PathMoments path_moments(const MartingaleModel& model, const MartingalePath& path,
                         const ModelConstants& constants);

// E[(X^+)^p]: exact for the atomic laws, half the absolute moment for the
// symmetric continuous ones
double pos_pow_moment(const Distribution& dist, double p);

} // namespace mtb
