#pragma once

// Random-restart coordinate descent over auxiliary systems, tracing a
// deterministic Pareto front of the achievable bounds.

#include <cstdint>
#include <string>
#include <vector>

#include "fcomp/model.hpp"
#include "fcomp/regions.hpp"

namespace fcomp {

enum class SearchMode { lossless, lossy };

struct SearchConfig {
    // Auxiliary cardinalities; 0 selects the module default (|U_i| = |X_i|+1,
    // |V_i| = 2, |Q| = 1).  Hard ceilings per mode: |Q| <= 2,
    // |V_i| <= |X_i|+6, |U_i| <= (|X_i|+6)^2 lossless; +7 variants lossy.
    int card_u1 = 0;
    int card_u2 = 0;
    int card_v1 = 0;
    int card_v2 = 0;
    int card_q = 0;
    int restarts = 8;
    int iterations = 120;       // descent steps per restart
    double scale = 0.25;        // perturbation mix toward a random simplex point
    std::uint64_t seed = 1;
    SearchMode mode = SearchMode::lossless;
    std::vector<double> weights;  // scalarization; empty = uniform
    double penalty = 4.0;         // admissibility penalty weight (lossless)
    double tol_adm = kTolAdm;     // hard post-hoc admissibility filter
};

struct ParetoPoint {
    std::string fingerprint;  // stable 64-bit hex hash of the serialized aux
    AuxSystem aux;
    RateBounds bounds;
};

// Mutually non-dominated points, sorted by bound values then fingerprint.
using ParetoFront = std::vector<ParetoPoint>;

// Deterministic for fixed (model, cfg) under any worker count.  Always
// evaluates the identity and constant auxiliary systems, so the lossless
// front is never empty.
ParetoFront search_inner(const SourceModel& model, const SearchConfig& cfg);

// Mixes one uniformly chosen conditional-channel row toward a random point
// of the simplex: row' = (1-s) row + s e.  Deterministic given seed.
AuxSystem local_step(const AuxSystem& aux, double scale, std::uint64_t seed);

// Plain weighted sum over (r_s, r_w1, r_w2, r_w_sum, r_l_dec, r_l_eve[, d]);
// the weight count must match the objective count (6, or 7 with d).
double scalarize(const RateBounds& bounds, const std::vector<double>& weights);

// Serialization hash used for reporting and deterministic tie-breaking.
std::string aux_fingerprint(const AuxSystem& aux);

// Parallelism degree: FCOMP_WORKERS if set to a positive integer, else the
// hardware concurrency clamped to [1, 8].
int worker_count();

} // namespace fcomp
