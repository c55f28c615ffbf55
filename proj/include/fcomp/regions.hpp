#pragma once

// Rate-bound evaluators: general inner and outer bounds driven by an
// auxiliary system, the four structured special cases (lemmas 1-4), corner
// points of the storage trade-off, and lossy variants with an explicit or
// optimized reconstruction map.

#include <optional>
#include <utility>
#include <vector>

#include "fcomp/model.hpp"
#include "fcomp/prob.hpp"

namespace fcomp {

enum class BoundOrigin {
    thm1_inner,
    thm1_outer,
    thm2_inner,
    thm2_outer,
    lemma1,
    lemma2,
    lemma3,
    lemma4,
};
const char* to_string(BoundOrigin o);

// One tuple of simultaneously achievable (inner) or necessary (outer) rate
// bounds, in bits per source symbol.
struct RateBounds {
    double r_s = 0.0;      // secrecy leakage to the eavesdropper
    double r_w1 = 0.0;     // storage for transmitter 1
    double r_w2 = 0.0;     // storage for transmitter 2
    double r_w_sum = 0.0;  // joint storage
    double r_l_dec = 0.0;  // privacy leakage to the fusion center
    double r_l_eve = 0.0;  // privacy leakage to the eavesdropper
    std::optional<double> d;  // expected distortion (lossy bounds only)
    BoundOrigin origin = BoundOrigin::thm1_inner;
};

enum class DecodeOrder { order_12, order_21 };

struct CornerPoint {
    DecodeOrder order;
    RateBounds bounds;
};

// Reconstruction map [u1][u2][y] -> index into the reconstruction alphabet.
using ReconstructionMap = std::vector<int>;

namespace detail {
// The six general inner-bound expressions evaluated on a full induced joint
// (axes Q, V1, V2, U1, U2, X1, X2, X, Y, Z in any order).  No admissibility
// check; callers own that contract.
RateBounds inner_expressions(const JointDist& joint);
} // namespace detail

// General achievable bounds for a lossless system; requires an admissible
// auxiliary system.
RateBounds eval_inner_lossless(const SourceModel& model, const AuxSystem& aux);

// Converse-side bounds evaluated on an explicit 10-axis joint
// (Q, V1, V2, U1, U2, X1, X2, X, Y, Z).  Precondition: both long Markov
// chains hold on the joint within tol.
RateBounds eval_outer_lossless(const JointDist& joint_with_aux, double tol = kTolNum);

// Achievable bounds with reconstruction map g (optimal map when omitted);
// admissibility is not required.  model.distortion must be present.
RateBounds eval_inner_lossy(const SourceModel& model, const AuxSystem& aux,
                            const std::optional<ReconstructionMap>& g = {});

// Cell-wise minimizer of expected distortion given (u1, u2, y); ties break
// toward the smallest reconstruction index, zero-probability cells map to 0.
ReconstructionMap optimal_reconstruction(const SourceModel& model, const AuxSystem& aux);

// Partially invertible case: U1 is forced to a copy of X1, the rest of the
// auxiliary system is taken from aux.  Requires X1 to be recoverable from
// (f, y), i.e. class partially_invertible_wrt_1 or invertible.
RateBounds eval_lemma1(const SourceModel& model, const AuxSystem& aux);

// Invertible case; optional deterministic or stochastic time-sharing channel
// (X1, X2) -> Q with |Q| <= 2 (constant when omitted).
RateBounds eval_lemma2(const SourceModel& model,
                       const std::optional<Channel>& q_channel = {});

// Invertible case with an eavesdropper degraded with respect to the fusion
// center: I(X; Z | Y) = 0.
RateBounds eval_lemma3(const SourceModel& model);

// Invertible case with a fusion center degraded with respect to the
// eavesdropper: I(X; Y | Z) = 0.
RateBounds eval_lemma4(const SourceModel& model);

// Both successive-decoding corner points of the storage region for a given
// admissible auxiliary system.
std::pair<CornerPoint, CornerPoint> corner_points(const SourceModel& model,
                                                  const AuxSystem& aux);

// Deterministic search over constant, deterministic, and a fixed batch of
// random (X1, X2) -> Q channels with |Q| <= 2, minimizing the clipped
// secrecy-rate bracket of lemma 2.  Ties keep the earliest candidate.
Channel best_lemma2_q(const SourceModel& model);

} // namespace fcomp
