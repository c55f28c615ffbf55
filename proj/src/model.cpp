#include "fcomp/model.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>

#include "fcomp/errors.hpp"

namespace fcomp {
namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidInput(msg);
}

void check_axis_name(const Alphabet& a, const char* expected) {
    if (a.name != expected) {
        throw InvalidInput("alphabet named '" + a.name + "' where '" + expected +
                           "' is required");
    }
    if (a.size() == 0) throw InvalidInput(std::string("alphabet '") + expected + "' is empty");
}

void check_channel_shape(const Channel& ch, const char* label,
                         const std::vector<Alphabet>& from, const std::vector<Alphabet>& to) {
    std::ostringstream err;
    if (ch.from_axes.size() != from.size() || ch.to_axes.size() != to.size()) {
        err << label << ": expected " << from.size() << " conditioning axis(es) and "
            << to.size() << " output axis(es), got " << ch.from_axes.size() << " and "
            << ch.to_axes.size();
        throw InvalidInput(err.str());
    }
    for (std::size_t i = 0; i < from.size(); ++i) {
        if (!(ch.from_axes[i] == from[i])) {
            err << label << ": conditioning axis " << i << " must be alphabet '"
                << from[i].name << "' (" << from[i].size() << " symbols)";
            throw InvalidInput(err.str());
        }
    }
    for (std::size_t i = 0; i < to.size(); ++i) {
        if (!(ch.to_axes[i] == to[i])) {
            err << label << ": output axis " << i << " must be alphabet '" << to[i].name
                << "' (" << to[i].size() << " symbols)";
            throw InvalidInput(err.str());
        }
    }
    ch.validate();
}

} // namespace

const char* to_string(FunctionClass c) {
    switch (c) {
    case FunctionClass::invertible: return "invertible";
    case FunctionClass::partially_invertible_wrt_1: return "partially_invertible_wrt_1";
    case FunctionClass::partially_invertible_wrt_2: return "partially_invertible_wrt_2";
    case FunctionClass::general: return "general";
    }
    return "unknown";
}

void SourceModel::validate() const {
    check_axis_name(x, "X");
    check_axis_name(x1, "X1");
    check_axis_name(x2, "X2");
    check_axis_name(y, "Y");
    check_axis_name(z, "Z");
    check_axis_name(f, "F");

    require(p_x.size() == static_cast<std::size_t>(x.size()), "p_x has " + std::to_string(p_x.size()) +
                                        " entries for " + std::to_string(x.size()) +
                                        " source symbols");
    double total = 0.0;
    for (std::size_t i = 0; i < p_x.size(); ++i) {
        require(std::isfinite(p_x[i]) && p_x[i] >= 0.0,
                "p_x[" + std::to_string(i) + "] is negative or not finite");
        total += p_x[i];
    }
    require(std::abs(total - 1.0) <= kTolNorm,
            "p_x sums to " + std::to_string(total) + ", expected 1");

    check_channel_shape(ch1, "ch1", {x}, {x1});
    check_channel_shape(ch2, "ch2", {x}, {x2});
    check_channel_shape(ch_yz, "ch_yz", {x}, {y, z});

    const std::size_t cells = x1.size() * x2.size() * y.size();
    require(f_table.size() == cells, "f table has " + std::to_string(f_table.size()) +
                                         " entries, expected " + std::to_string(cells));
    for (std::size_t i = 0; i < f_table.size(); ++i) {
        require(f_table[i] >= 0 && f_table[i] < static_cast<int>(f.size()),
                "f table entry " + std::to_string(i) + " = " + std::to_string(f_table[i]) +
                    " is outside the function alphabet");
    }

    if (distortion) {
        require(distortion->f_hat.size() > 0, "distortion: reconstruction alphabet is empty");
        const std::size_t want = f.size() * distortion->f_hat.size();
        require(distortion->d.size() == want,
                "distortion table has " + std::to_string(distortion->d.size()) +
                    " entries, expected " + std::to_string(want));
        for (std::size_t i = 0; i < distortion->d.size(); ++i) {
            require(std::isfinite(distortion->d[i]) && distortion->d[i] >= 0.0,
                    "distortion entry " + std::to_string(i) + " is negative or not finite");
        }
    }
}

void AuxSystem::validate(const SourceModel& model) const {
    check_axis_name(q, "Q");
    require(!branches.empty(), "auxiliary system has no branches");
    require(branches.size() == static_cast<std::size_t>(q.size()),
            "auxiliary system has " + std::to_string(branches.size()) + " branches for " +
                std::to_string(q.size()) + " time-sharing symbols");
    require(weights.size() == branches.size(),
            "auxiliary system has " + std::to_string(weights.size()) + " weights for " +
                std::to_string(branches.size()) + " branches");
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        require(std::isfinite(weights[i]) && weights[i] >= 0.0,
                "time-sharing weight " + std::to_string(i) + " is negative or not finite");
        total += weights[i];
    }
    require(std::abs(total - 1.0) <= kTolNorm,
            "time-sharing weights sum to " + std::to_string(total) + ", expected 1");

    const AuxBranch& first = branches.front();
    for (const Channel* ch : {&first.u1, &first.v1, &first.u2, &first.v2}) {
        require(ch->to_axes.size() == 1,
                "auxiliary channels must have exactly one output axis");
    }
    const Alphabet& au1 = first.u1.to_axes[0];
    const Alphabet& av1 = first.v1.to_axes[0];
    const Alphabet& au2 = first.u2.to_axes[0];
    const Alphabet& av2 = first.v2.to_axes[0];
    for (std::size_t i = 0; i < branches.size(); ++i) {
        const std::string label = "branch " + std::to_string(i);
        const AuxBranch& b = branches[i];
        check_channel_shape(b.u1, (label + " u1-channel").c_str(), {model.x1}, {au1});
        check_channel_shape(b.v1, (label + " v1-channel").c_str(), {au1}, {av1});
        check_channel_shape(b.u2, (label + " u2-channel").c_str(), {model.x2}, {au2});
        check_channel_shape(b.v2, (label + " v2-channel").c_str(), {au2}, {av2});
    }
    check_axis_name(au1, "U1");
    check_axis_name(av1, "V1");
    check_axis_name(au2, "U2");
    check_axis_name(av2, "V2");
}

JointDist build_joint(const SourceModel& model) {
    model.validate();
    JointDist px({model.x}, model.p_x);
    JointDist j = compose(px, model.ch1);
    j = compose(j, model.ch2);
    j = compose(j, model.ch_yz);
    return j; // axes (X, X1, X2, Y, Z)
}

JointDist induced_joint(const SourceModel& model, const AuxSystem& aux) {
    aux.validate(model);
    const JointDist base = build_joint(model);

    std::vector<Alphabet> axes;
    axes.push_back(aux.q);
    std::vector<double> mass;
    bool axes_known = false;

    for (std::size_t qi = 0; qi < aux.branches.size(); ++qi) {
        const AuxBranch& b = aux.branches[qi];
        JointDist j = compose(base, b.u1);
        j = compose(j, b.v1);
        j = compose(j, b.u2);
        j = compose(j, b.v2);
        if (!axes_known) {
            for (const Alphabet& a : j.axes()) axes.push_back(a);
            mass.reserve(aux.branches.size() * j.mass().size());
            axes_known = true;
        }
        const double w = aux.weights[qi];
        for (double p : j.mass()) mass.push_back(w * p);
    }
    // Q is the slowest axis, so the per-branch blocks concatenate directly.
    return JointDist(axes, mass); // (Q, X, X1, X2, Y, Z, U1, V1, U2, V2)
}

JointDist with_function_axis(const SourceModel& model, const JointDist& joint) {
    Channel ch = Channel::deterministic({model.x1, model.x2, model.y}, model.f, model.f_table);
    return compose(joint, ch);
}

SourceModel bernoulli_example_model(double b1, double b2, double alpha, double q) {
    for (double v : {b1, b2, alpha, q}) {
        if (!(std::isfinite(v) && v >= 0.0 && v <= 1.0)) {
            throw InvalidInput("example parameters must lie in [0, 1]");
        }
    }
    SourceModel m;
    m.x = {"X", {"0", "1"}};
    m.x1 = {"X1", {"0", "1"}};
    m.x2 = {"X2", {"0", "1"}};
    m.y = {"Y", {"0", "1"}};
    m.z = {"Z", {"0", "1"}};
    m.f = {"F", {"00", "01", "10", "11"}};
    m.p_x = {0.5, 0.5};
    // X1 = S1 * X with P(S1 = 1) = b1: from 0 always 0, from 1 keep w.p. b1.
    m.ch1 = Channel{{m.x}, {m.x1}, {1.0, 0.0, 1.0 - b1, b1}};
    m.ch2 = Channel{{m.x}, {m.x2}, {1.0, 0.0, 1.0 - b2, b2}};
    // (Y, Z) = (SY * X, SZ * X) with the erasure pair (SZ, SY) distributed as
    // P(0,0) = 1-q, P(1,1) = q*alpha, P(1,0) = q*(1-alpha), P(0,1) = 0.
    // Rows are indexed by x, columns by (y, z) with z fastest.
    const double p00 = 1.0 - q;          // y=0, z=0 given x=1
    const double p01 = q * (1.0 - alpha); // y=0, z=1
    const double p11 = q * alpha;        // y=1, z=1
    m.ch_yz = Channel{{m.x}, {m.y, m.z}, {
        1.0, 0.0, 0.0, 0.0,   // x = 0: (y,z) = (0,0)
        p00, p01, 0.0, p11,   // x = 1
    }};
    m.f_table.resize(8);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int yv = 0; yv < 2; ++yv)
                m.f_table[static_cast<std::size_t>((a * 2 + b) * 2 + yv)] = a * 2 + b;
    m.validate();
    return m;
}

FunctionClass classify_function(const SourceModel& model, double tol) {
    const JointDist j = with_function_axis(model, build_joint(model));
    const VarSet fy{"F", "Y"};
    const double h12 = conditional_entropy(j, {"X1", "X2"}, fy);
    if (h12 <= tol) return FunctionClass::invertible;
    if (conditional_entropy(j, {"X1"}, fy) <= tol) return FunctionClass::partially_invertible_wrt_1;
    if (conditional_entropy(j, {"X2"}, fy) <= tol) return FunctionClass::partially_invertible_wrt_2;
    return FunctionClass::general;
}

DegradednessReport check_degradedness(const SourceModel& model, double tol) {
    const JointDist j = build_joint(model);
    DegradednessReport r;
    r.residual_eve = mutual_information(j, {"X"}, {"Z"}, {"Y"});
    r.residual_fusion = mutual_information(j, {"X"}, {"Y"}, {"Z"});
    r.eve_degraded = r.residual_eve <= tol;
    r.fusion_degraded = r.residual_fusion <= tol;
    return r;
}

std::pair<bool, double> check_admissible(const SourceModel& model, const AuxSystem& aux,
                                         double tol_adm) {
    if (!(std::isfinite(tol_adm) && tol_adm >= 0.0)) {
        throw InvalidInput("admissibility tolerance must be nonnegative");
    }
    const JointDist j = with_function_axis(model, induced_joint(model, aux));
    const double residual = conditional_entropy(j, {"F"}, {"U1", "U2", "Y", "Q"});
    return {residual <= tol_adm, residual};
}

double verify_markov(const JointDist& joint, const std::vector<VarSet>& chain) {
    if (chain.size() < 3) {
        throw PreconditionError("a Markov chain needs at least three variable groups");
    }
    std::vector<std::string> seen;
    for (const VarSet& group : chain) {
        if (group.empty()) throw PreconditionError("Markov chain contains an empty group");
        for (const std::string& v : group) {
            if (!joint.has_axis(v)) {
                throw PreconditionError("Markov chain variable '" + v +
                                        "' is not an axis of the distribution");
            }
            for (const std::string& s : seen) {
                if (s == v) {
                    throw PreconditionError("Markov chain groups must be disjoint; '" + v +
                                            "' appears twice");
                }
            }
            seen.push_back(v);
        }
    }
    double worst = 0.0;
    for (std::size_t i = 0; i + 2 < chain.size(); ++i) {
        const double leak = mutual_information(joint, chain[i], chain[i + 2], chain[i + 1]);
        if (leak > worst) worst = leak;
    }
    return worst;
}

AuxSystem identity_aux(const SourceModel& model) {
    AuxSystem a;
    a.q = {"Q", {"q0"}};
    a.weights = {1.0};
    AuxBranch b;
    b.u1 = Channel::identity(model.x1, "U1");
    b.v1 = Channel::constant({b.u1.to_axes[0]}, "V1");
    b.u2 = Channel::identity(model.x2, "U2");
    b.v2 = Channel::constant({b.u2.to_axes[0]}, "V2");
    a.branches.push_back(std::move(b));
    return a;
}

AuxSystem constant_aux(const SourceModel& model) {
    AuxSystem a;
    a.q = {"Q", {"q0"}};
    a.weights = {1.0};
    AuxBranch b;
    b.u1 = Channel::constant({model.x1}, "U1");
    b.v1 = Channel::constant({b.u1.to_axes[0]}, "V1");
    b.u2 = Channel::constant({model.x2}, "U2");
    b.v2 = Channel::constant({b.u2.to_axes[0]}, "V2");
    a.branches.push_back(std::move(b));
    return a;
}

void add_hamming_distortion(SourceModel& model) {
    Distortion d;
    d.f_hat = {"Fh", model.f.symbols};
    const std::size_t nf = static_cast<std::size_t>(model.f.size());
    d.d.assign(nf * nf, 1.0);
    for (std::size_t i = 0; i < nf; ++i) {
        d.d[i * nf + i] = 0.0;
    }
    model.distortion = std::move(d);
}

} // namespace fcomp
