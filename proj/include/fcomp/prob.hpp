#pragma once

// Exact discrete probability and information calculus over named finite
// variables.  All logs are base 2; every quantity is in bits.

#include <cstddef>
#include <string>
#include <vector>

#include "fcomp/errors.hpp"

namespace fcomp {

// Tolerances.  tol_num guards information identities, tol_norm guards
// normalization; both can be overridden per call.
inline constexpr double kTolNum = 1e-9;
inline constexpr double kTolNorm = 1e-12;
// Mass below this is treated as an exact zero inside log computations.
inline constexpr double kZeroMass = 1e-15;

struct Alphabet {
    std::string name;                   // variable identifier, e.g. "X1"
    std::vector<std::string> symbols;   // ordered, unique labels

    int size() const { return static_cast<int>(symbols.size()); }
    bool operator==(const Alphabet&) const = default;
};

// A set of variable names, given as a list; order is irrelevant.
using VarSet = std::vector<std::string>;

// Dense pmf over an ordered tuple of named finite variables.  Row-major
// storage, last axis fastest.  Immutable after construction.
class JointDist {
  public:
    JointDist() = default;
    // Validates: unique axis names, nonnegative mass, total 1 within tol_norm.
    JointDist(std::vector<Alphabet> axes, std::vector<double> mass,
              double tol_norm = kTolNorm);

    const std::vector<Alphabet>& axes() const { return axes_; }
    const std::vector<double>& mass() const { return mass_; }
    std::size_t cells() const { return mass_.size(); }
    int rank() const { return static_cast<int>(axes_.size()); }

    bool has_axis(const std::string& name) const;
    int axis_index(const std::string& name) const;  // throws InvalidInput
    const Alphabet& axis(const std::string& name) const;

    // Per-axis digits of a linear cell index.
    void decode_cell(std::size_t cell, int* digits) const;
    std::size_t stride(int axis) const { return strides_[axis]; }

  private:
    std::vector<Alphabet> axes_;
    std::vector<double> mass_;
    std::vector<std::size_t> strides_;
};

// Conditional distribution kernel: one pmf over to_axes per joint symbol of
// from_axes.  kernel is row-major [from-cell][to-cell].
struct Channel {
    std::vector<Alphabet> from_axes;
    std::vector<Alphabet> to_axes;
    std::vector<double> kernel;

    std::size_t from_cells() const;
    std::size_t to_cells() const;
    // Throws InvalidInput with a row-level diagnostic on the first offending
    // conditional slice.
    void validate(double tol_norm = kTolNorm) const;

    // X -> copy-of-X under a new variable name.
    static Channel identity(const Alphabet& input, const std::string& out_name);
    // Anything -> a fixed single-symbol variable.
    static Channel constant(std::vector<Alphabet> from, const std::string& out_name,
                            const std::string& symbol = "*");
    // Deterministic map given per-conditioning-cell output indices.
    static Channel deterministic(std::vector<Alphabet> from, Alphabet to,
                                 const std::vector<int>& out_index);
};

// H(vars) in bits over the marginal of dist on vars.
double entropy(const JointDist& dist, const VarSet& vars);

// H(vars | given) = H(vars ∪ given) - H(given); sets must be disjoint.
double conditional_entropy(const JointDist& dist, const VarSet& vars,
                           const VarSet& given, double tol_num = kTolNum);

// I(a; b | given); a, b, given pairwise disjoint.  Values in [-tol_num, 0)
// clamp to 0; anything lower throws ConsistencyError.
double mutual_information(const JointDist& dist, const VarSet& a, const VarSet& b,
                          const VarSet& given = {}, double tol_num = kTolNum);

// Sum out all axes not listed in keep; axis order of the result follows dist.
JointDist marginalize(const JointDist& dist, const VarSet& keep);

// Joint over base axes ∪ channel.to_axes with mass p(base) * k(to | from).
JointDist compose(const JointDist& base, const Channel& channel);

// [a]^- = min{a, 0}.
double neg_part(double a);

// Hb(c) = -c log2 c - (1-c) log2(1-c), 0 at the endpoints.
double binary_entropy(double c);

} // namespace fcomp
