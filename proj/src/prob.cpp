#include "fcomp/prob.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace fcomp {

namespace {

// Clamp policy for information quantities: tiny negatives are numerical
// noise and become exact zeros; larger ones mean a formula bug.
double finish_info(double v, double tol_num, const char* what) {
    if (v >= 0.0) return v;
    if (v >= -tol_num) return 0.0;
    std::ostringstream os;
    os << what << " came out " << v << ", below -tol_num = " << -tol_num;
    throw ConsistencyError(os.str());
}

double plogp(double p) {
    if (p < kZeroMass) return 0.0;  // 0 log 0 := 0
    return p * std::log2(p);
}

std::vector<std::size_t> row_major_strides(const std::vector<Alphabet>& axes) {
    std::vector<std::size_t> s(axes.size(), 1);
    for (int i = static_cast<int>(axes.size()) - 2; i >= 0; --i)
        s[i] = s[i + 1] * static_cast<std::size_t>(axes[i + 1].size());
    return s;
}

std::size_t cell_count(const std::vector<Alphabet>& axes) {
    std::size_t c = 1;
    for (const auto& a : axes) c *= static_cast<std::size_t>(a.size());
    return c;
}

void check_unique_names(const std::vector<Alphabet>& axes) {
    std::set<std::string> seen;
    for (const auto& a : axes) {
        if (a.size() < 1) throw InvalidInput("alphabet '" + a.name + "' is empty");
        std::set<std::string> syms(a.symbols.begin(), a.symbols.end());
        if (syms.size() != a.symbols.size())
            throw InvalidInput("alphabet '" + a.name + "' has duplicate symbols");
        if (!seen.insert(a.name).second)
            throw InvalidInput("duplicate axis name '" + a.name + "'");
    }
}

// Resolve a VarSet against dist axes: unique names, all present.
std::vector<int> resolve(const JointDist& d, const VarSet& vars, const char* which) {
    if (vars.empty()) throw InvalidInput(std::string("empty variable set for ") + which);
    std::set<std::string> seen;
    std::vector<int> idx;
    idx.reserve(vars.size());
    for (const auto& v : vars) {
        if (!seen.insert(v).second)
            throw InvalidInput("variable '" + v + "' repeated in " + which);
        idx.push_back(d.axis_index(v));
    }
    return idx;
}

void check_disjoint(const VarSet& a, const VarSet& b, const char* what) {
    for (const auto& x : a)
        for (const auto& y : b)
            if (x == y)
                throw InvalidInput(std::string("overlapping variable sets (") + what +
                                   "): '" + x + "'");
}

VarSet set_union(const VarSet& a, const VarSet& b) {
    VarSet u = a;
    for (const auto& y : b)
        if (std::find(u.begin(), u.end(), y) == u.end()) u.push_back(y);
    return u;
}

} // namespace

JointDist::JointDist(std::vector<Alphabet> axes, std::vector<double> mass,
                     double tol_norm)
    : axes_(std::move(axes)), mass_(std::move(mass)) {
    check_unique_names(axes_);
    if (mass_.size() != cell_count(axes_))
        throw InvalidInput("mass has " + std::to_string(mass_.size()) +
                           " entries, expected " + std::to_string(cell_count(axes_)));
    double total = 0.0;
    for (std::size_t i = 0; i < mass_.size(); ++i) {
        if (!(mass_[i] >= 0.0))
            throw InvalidInput("mass entry " + std::to_string(i) + " is negative (" +
                               std::to_string(mass_[i]) + ")");
        total += mass_[i];
    }
    if (std::abs(total - 1.0) > tol_norm)
        throw InvalidInput("mass sums to " + std::to_string(total) +
                           ", outside 1 +/- tol_norm");
    strides_ = row_major_strides(axes_);
}

bool JointDist::has_axis(const std::string& name) const {
    for (const auto& a : axes_)
        if (a.name == name) return true;
    return false;
}

int JointDist::axis_index(const std::string& name) const {
    for (std::size_t i = 0; i < axes_.size(); ++i)
        if (axes_[i].name == name) return static_cast<int>(i);
    throw InvalidInput("unknown variable '" + name + "'");
}

const Alphabet& JointDist::axis(const std::string& name) const {
    return axes_[static_cast<std::size_t>(axis_index(name))];
}

void JointDist::decode_cell(std::size_t cell, int* digits) const {
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        digits[i] = static_cast<int>(cell / strides_[i]);
        cell %= strides_[i];
    }
}

std::size_t Channel::from_cells() const { return cell_count(from_axes); }
std::size_t Channel::to_cells() const { return cell_count(to_axes); }

void Channel::validate(double tol_norm) const {
    check_unique_names(from_axes);
    check_unique_names(to_axes);
    for (const auto& f : from_axes)
        for (const auto& t : to_axes)
            if (f.name == t.name)
                throw InvalidInput("channel reuses axis name '" + f.name + "'");
    const std::size_t nf = from_cells(), nt = to_cells();
    if (nt == 0 || nf == 0) throw InvalidInput("channel with empty axis list");
    if (kernel.size() != nf * nt)
        throw InvalidInput("kernel has " + std::to_string(kernel.size()) +
                           " entries, expected " + std::to_string(nf * nt));
    for (std::size_t r = 0; r < nf; ++r) {
        double total = 0.0;
        for (std::size_t c = 0; c < nt; ++c) {
            const double v = kernel[r * nt + c];
            if (!(v >= 0.0))
                throw InvalidInput("kernel row " + std::to_string(r) + ", entry " +
                                   std::to_string(c) + " is negative");
            total += v;
        }
        if (std::abs(total - 1.0) > tol_norm)
            throw InvalidInput("kernel row " + std::to_string(r) + " sums to " +
                               std::to_string(total) + ", not 1");
    }
}

Channel Channel::identity(const Alphabet& input, const std::string& out_name) {
    Channel ch;
    ch.from_axes = {input};
    ch.to_axes = {Alphabet{out_name, input.symbols}};
    const int n = input.size();
    ch.kernel.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) ch.kernel[static_cast<std::size_t>(i) * n + i] = 1.0;
    return ch;
}

Channel Channel::constant(std::vector<Alphabet> from, const std::string& out_name,
                          const std::string& symbol) {
    Channel ch;
    ch.from_axes = std::move(from);
    ch.to_axes = {Alphabet{out_name, {symbol}}};
    ch.kernel.assign(ch.from_cells(), 1.0);
    return ch;
}

Channel Channel::deterministic(std::vector<Alphabet> from, Alphabet to,
                               const std::vector<int>& out_index) {
    Channel ch;
    ch.from_axes = std::move(from);
    ch.to_axes = {std::move(to)};
    const std::size_t nf = ch.from_cells(), nt = ch.to_cells();
    if (out_index.size() != nf)
        throw InvalidInput("deterministic channel table has " +
                           std::to_string(out_index.size()) + " entries, expected " +
                           std::to_string(nf));
    ch.kernel.assign(nf * nt, 0.0);
    for (std::size_t r = 0; r < nf; ++r) {
        const int o = out_index[r];
        if (o < 0 || static_cast<std::size_t>(o) >= nt)
            throw InvalidInput("deterministic channel output index out of range at row " +
                               std::to_string(r));
        ch.kernel[r * nt + static_cast<std::size_t>(o)] = 1.0;
    }
    return ch;
}

JointDist marginalize(const JointDist& dist, const VarSet& keep) {
    const std::vector<int> kept = resolve(dist, keep, "marginalize");
    std::vector<char> is_kept(dist.axes().size(), 0);
    for (int i : kept) is_kept[static_cast<std::size_t>(i)] = 1;

    std::vector<Alphabet> out_axes;
    for (std::size_t i = 0; i < dist.axes().size(); ++i)
        if (is_kept[i]) out_axes.push_back(dist.axes()[i]);
    if (out_axes.size() == dist.axes().size()) return dist;

    const auto out_strides = row_major_strides(out_axes);
    std::vector<double> out_mass(cell_count(out_axes), 0.0);

    std::vector<int> digits(dist.axes().size());
    for (std::size_t cell = 0; cell < dist.cells(); ++cell) {
        const double p = dist.mass()[cell];
        if (p == 0.0) continue;
        dist.decode_cell(cell, digits.data());
        std::size_t out = 0, k = 0;
        for (std::size_t i = 0; i < dist.axes().size(); ++i)
            if (is_kept[i]) out += out_strides[k++] * static_cast<std::size_t>(digits[i]);
        out_mass[out] += p;
    }
    return JointDist(std::move(out_axes), std::move(out_mass));
}

double entropy(const JointDist& dist, const VarSet& vars) {
    resolve(dist, vars, "entropy");
    const JointDist m = marginalize(dist, vars);
    double h = 0.0;
    for (double p : m.mass()) h -= plogp(p);
    return h < 0.0 ? 0.0 : h;  // -0.0 and rounding dust on point masses
}

double conditional_entropy(const JointDist& dist, const VarSet& vars,
                           const VarSet& given, double tol_num) {
    check_disjoint(vars, given, "conditional_entropy");
    resolve(dist, vars, "conditional_entropy");
    if (given.empty()) return entropy(dist, vars);
    const double h = entropy(dist, set_union(vars, given)) - entropy(dist, given);
    return finish_info(h, tol_num, "conditional entropy");
}

double mutual_information(const JointDist& dist, const VarSet& a, const VarSet& b,
                          const VarSet& given, double tol_num) {
    check_disjoint(a, b, "mutual_information");
    check_disjoint(a, given, "mutual_information");
    check_disjoint(b, given, "mutual_information");
    resolve(dist, a, "mutual_information");
    resolve(dist, b, "mutual_information");

    const VarSet ag = set_union(a, given);
    const VarSet bg = set_union(b, given);
    const VarSet abg = set_union(ag, b);
    double i = entropy(dist, ag) + entropy(dist, bg) - entropy(dist, abg);
    if (!given.empty()) i -= entropy(dist, given);
    return finish_info(i, tol_num, "mutual information");
}

JointDist compose(const JointDist& base, const Channel& channel) {
    channel.validate();
    for (const auto& t : channel.to_axes)
        if (base.has_axis(t.name))
            throw InvalidInput("compose: axis '" + t.name + "' already present in base");
    std::vector<int> from_idx;
    for (const auto& f : channel.from_axes) {
        const int i = base.axis_index(f.name);  // throws if missing
        if (base.axes()[static_cast<std::size_t>(i)] != f)
            throw InvalidInput("compose: alphabet mismatch on conditioning axis '" +
                               f.name + "'");
        from_idx.push_back(i);
    }

    std::vector<Alphabet> out_axes = base.axes();
    out_axes.insert(out_axes.end(), channel.to_axes.begin(), channel.to_axes.end());

    const auto from_strides = row_major_strides(channel.from_axes);
    const std::size_t nt = channel.to_cells();
    std::vector<double> out_mass(base.cells() * nt, 0.0);

    std::vector<int> digits(base.axes().size());
    for (std::size_t cell = 0; cell < base.cells(); ++cell) {
        const double p = base.mass()[cell];
        if (p == 0.0) continue;
        base.decode_cell(cell, digits.data());
        std::size_t cond = 0;
        for (std::size_t k = 0; k < from_idx.size(); ++k)
            cond += from_strides[k] *
                    static_cast<std::size_t>(digits[static_cast<std::size_t>(from_idx[k])]);
        const double* row = channel.kernel.data() + cond * nt;
        double* out = out_mass.data() + cell * nt;
        for (std::size_t t = 0; t < nt; ++t) out[t] = p * row[t];
    }
    return JointDist(std::move(out_axes), std::move(out_mass));
}

double neg_part(double a) {
    if (!std::isfinite(a)) throw InvalidInput("neg_part: non-finite argument");
    return a < 0.0 ? a : 0.0;
}

double binary_entropy(double c) {
    if (!(c >= 0.0 && c <= 1.0))
        throw InvalidInput("binary_entropy: argument outside [0,1]");
    return -plogp(c) - plogp(1.0 - c);
}

} // namespace fcomp
