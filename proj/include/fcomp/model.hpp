#pragma once

// Problem instance: remote source X, two noisy measurements X1 and X2, a
// fusion-center observation Y, an eavesdropper observation Z, and a target
// function f(x1, x2, y), plus the auxiliary-variable systems evaluated
// against it.

#include <optional>
#include <utility>
#include <vector>

#include "fcomp/prob.hpp"

namespace fcomp {

// Admissibility tolerance (bits), separate from kTolNum.
inline constexpr double kTolAdm = 1e-9;

struct Distortion {
    Alphabet f_hat;          // reconstruction alphabet
    std::vector<double> d;   // [f][f_hat], nonnegative
};

struct SourceModel {
    Alphabet x, x1, x2, y, z, f;
    std::vector<double> p_x;  // distribution over x
    Channel ch1;              // X -> X1
    Channel ch2;              // X -> X2
    Channel ch_yz;            // X -> (Y, Z)
    std::vector<int> f_table; // [x1][x2][y] row-major -> f symbol index
    std::optional<Distortion> distortion;

    int f_index(int a, int b, int yv) const {
        return f_table[static_cast<std::size_t>((a * x2.size() + b) * y.size() + yv)];
    }
    // Throws InvalidInput on any structural defect (axis names, sizes,
    // stochasticity, f_table range, distortion table shape).
    void validate() const;
};

enum class FunctionClass {
    invertible,
    partially_invertible_wrt_1,
    partially_invertible_wrt_2,
    general,
};
const char* to_string(FunctionClass c);

struct DegradednessReport {
    bool eve_degraded = false;
    bool fusion_degraded = false;
    double residual_eve = 0.0;     // I(X;Z|Y)
    double residual_fusion = 0.0;  // I(X;Y|Z)
};

// One time-sharing branch: U_i generated from the measurement, V_i from U_i.
struct AuxBranch {
    Channel u1;  // X1 -> U1
    Channel v1;  // U1 -> V1
    Channel u2;  // X2 -> U2
    Channel v2;  // U2 -> V2
};

// Mixture of complete auxiliary configurations selected by a time-sharing
// variable Q; all branches share the same U/V alphabets.
struct AuxSystem {
    Alphabet q;
    std::vector<double> weights;
    std::vector<AuxBranch> branches;

    void validate(const SourceModel& model) const;
};

// Joint over (X, X1, X2, Y, Z).
JointDist build_joint(const SourceModel& model);

// Joint over (Q, X, X1, X2, Y, Z, U1, V1, U2, V2).
JointDist induced_joint(const SourceModel& model, const AuxSystem& aux);

// Extends a joint containing X1, X2, Y by the deterministic function axis F.
JointDist with_function_axis(const SourceModel& model, const JointDist& joint);

// Binary multiplicative-noise example family: X ~ Bernoulli(1/2),
// X1 = S1*X, X2 = S2*X, Z = SZ*X, Y = SY*X with P(S1=1)=b1, P(S2=1)=b2,
// P(SZ,SY) = {(0,0): 1-q, (1,1): q*alpha, (1,0): q*(1-alpha)}.
// f defaults to the identity pair (x1, x2), which is invertible.
SourceModel bernoulli_example_model(double b1, double b2, double alpha, double q);

FunctionClass classify_function(const SourceModel& model, double tol = kTolNum);

DegradednessReport check_degradedness(const SourceModel& model, double tol = kTolNum);

// (admissible?, residual H(f | U1, U2, Y, Q)) on the induced joint.  The
// conditioning includes Q: a time-shared system must be admissible branch by
// branch.
std::pair<bool, double> check_admissible(const SourceModel& model, const AuxSystem& aux,
                                         double tol_adm = kTolAdm);

// Maximum of I(A;C|B) over adjacent triples of the chain; a value within
// tol_num of 0 is consistent with the Markov chain holding.
double verify_markov(const JointDist& joint, const std::vector<VarSet>& chain);

// U_i copies the measurement, V_i and Q are singletons.  Admissible for
// every target function.
AuxSystem identity_aux(const SourceModel& model);
// Every auxiliary variable is a singleton.
AuxSystem constant_aux(const SourceModel& model);

// Sets distortion to the 0/1 metric on the function alphabet itself.
void add_hamming_distortion(SourceModel& model);

} // namespace fcomp
