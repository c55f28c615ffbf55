#include "fcomp/binning.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "fcomp/errors.hpp"
#include "fcomp/rng.hpp"

namespace fcomp {
namespace {

constexpr std::uint64_t kMaxSequences = 1ULL << 22;  // per-layer map guard
constexpr std::uint64_t kMaxTableCells = 1ULL << 22; // leakage/memo table guard
constexpr double kWilsonZ = 1.959963984540054;       // 97.5% normal quantile

std::uint64_t ceil_bits(int n, double rate) {
    const double v = static_cast<double>(n) * rate;
    const double c = std::ceil(v - 1e-9);
    return c <= 0.0 ? 0 : static_cast<std::uint64_t>(c);
}

std::uint64_t pow_u64(int base, int n, const char* label) {
    std::uint64_t out = 1;
    for (int i = 0; i < n; ++i) {
        if (out > kMaxSequences / static_cast<std::uint64_t>(base)) {
            throw PreconditionError(std::string(label) +
                                    ": sequence space exceeds the 2^22 guard");
        }
        out *= static_cast<std::uint64_t>(base);
    }
    return out;
}

// MSB-first digits: rank order equals lexicographic sequence order.
std::vector<int> seq_digits(std::uint64_t count, int base, int n) {
    std::vector<int> d(static_cast<std::size_t>(count) * static_cast<std::size_t>(n));
    for (std::uint64_t s = 0; s < count; ++s) {
        std::uint64_t rest = s;
        for (int i = n - 1; i >= 0; --i) {
            d[static_cast<std::size_t>(s) * n + i] = static_cast<int>(rest % base);
            rest /= static_cast<std::uint64_t>(base);
        }
    }
    return d;
}

// Flat per-letter marginal p[(a*nb + b)*nc + c] for the named axes.
std::vector<double> letter_table(const JointDist& j, const std::string& a,
                                 const std::string& b, const std::string& c) {
    const JointDist m = marginalize(j, {a, b, c});
    const int nb = m.axis(b).size(), nc = m.axis(c).size();
    const int ia = m.axis_index(a), ib = m.axis_index(b), ic = m.axis_index(c);
    std::vector<double> out(m.cells(), 0.0);
    std::vector<int> digits(static_cast<std::size_t>(m.rank()));
    for (std::size_t cell = 0; cell < m.cells(); ++cell) {
        m.decode_cell(cell, digits.data());
        out[(static_cast<std::size_t>(digits[ia]) * nb + digits[ib]) * nc + digits[ic]] +=
            m.mass()[cell];
    }
    return out;
}

double finish_leakage(double v, const char* what) {
    if (v >= 0.0) return v;
    if (v >= -kTolNum) return 0.0;
    std::ostringstream err;
    err << what << " evaluated to " << v << ", below -" << kTolNum;
    throw ConsistencyError(err.str());
}

BinLayer draw_layer(std::mt19937_64& rng, std::uint64_t seq_count, const LayerRates& rates,
                    int n, const char* label) {
    BinLayer layer;
    layer.seq_count = seq_count;
    layer.f_of.assign(static_cast<std::size_t>(seq_count), 0);
    layer.w_of.assign(static_cast<std::size_t>(seq_count), 0);

    auto draw_map = [&](double rate, std::vector<std::uint32_t>& map, const char* kind) {
        const std::uint64_t e = ceil_bits(n, rate);
        std::uint64_t bins = e >= 63 ? 0 : (1ULL << e);
        if (e >= 63 || bins > seq_count) {
            std::cerr << "warning: " << label << " " << kind << "-rate requests 2^" << e
                      << " bins for " << seq_count
                      << " sequences; capping at an injective assignment\n";
            bins = seq_count;
        }
        if (bins == seq_count) {
            // Injective: a uniformly random permutation of the sequence space.
            std::vector<std::uint32_t> perm(static_cast<std::size_t>(seq_count));
            std::iota(perm.begin(), perm.end(), 0u);
            for (std::uint64_t i = seq_count; i > 1; --i) {
                const std::uint64_t j = bounded(rng, i);
                std::swap(perm[static_cast<std::size_t>(i - 1)],
                          perm[static_cast<std::size_t>(j)]);
            }
            map = std::move(perm);
        } else if (bins > 1) {
            for (std::uint64_t s = 0; s < seq_count; ++s) {
                map[static_cast<std::size_t>(s)] =
                    static_cast<std::uint32_t>(bounded(rng, bins));
            }
        }
        return bins;
    };

    layer.f_bins = draw_map(rates.f_rate, layer.f_of, "F");
    layer.w_bins = draw_map(rates.w_rate, layer.w_of, "W");
    return layer;
}

void check_rates(const BinRates& rates) {
    for (const LayerRates* lr : {&rates.v1, &rates.v2, &rates.u1, &rates.u2}) {
        if (!(std::isfinite(lr->f_rate) && lr->f_rate >= 0.0 &&
              std::isfinite(lr->w_rate) && lr->w_rate >= 0.0)) {
            throw InvalidInput("bin rates must be finite and nonnegative");
        }
    }
}

// Compressed view of one transmitter's combined (F, W) index.
struct CombinedIndex {
    std::uint64_t w_bins = 1;
    std::vector<std::uint32_t> rank_of_seq;      // sequence -> used-combination rank
    std::vector<std::uint32_t> f_of_rank;        // rank -> F-index
    std::vector<std::vector<std::uint32_t>> members; // rank -> sequences, ascending
};

CombinedIndex compress_layer(const BinLayer& layer) {
    CombinedIndex ci;
    ci.w_bins = layer.w_bins;
    std::vector<std::int64_t> rank_of_c(
        static_cast<std::size_t>(layer.f_bins * layer.w_bins), -1);
    ci.rank_of_seq.resize(static_cast<std::size_t>(layer.seq_count));
    for (std::uint64_t s = 0; s < layer.seq_count; ++s) {
        const std::uint64_t c =
            static_cast<std::uint64_t>(layer.f_of[static_cast<std::size_t>(s)]) *
                layer.w_bins +
            layer.w_of[static_cast<std::size_t>(s)];
        std::int64_t& r = rank_of_c[static_cast<std::size_t>(c)];
        if (r < 0) {
            r = static_cast<std::int64_t>(ci.members.size());
            ci.members.emplace_back();
            ci.f_of_rank.push_back(layer.f_of[static_cast<std::size_t>(s)]);
        }
        ci.rank_of_seq[static_cast<std::size_t>(s)] = static_cast<std::uint32_t>(r);
        ci.members[static_cast<std::size_t>(r)].push_back(static_cast<std::uint32_t>(s));
    }
    return ci;
}

// Row-wise cumulative sampler over conditional tables.
struct Sampler {
    int width = 0;
    std::vector<double> cum;  // [row * width + k], nondecreasing per row

    static Sampler from_rows(const std::vector<double>& rows, int width) {
        Sampler s;
        s.width = width;
        s.cum.resize(rows.size());
        const std::size_t nrows = rows.size() / static_cast<std::size_t>(width);
        for (std::size_t r = 0; r < nrows; ++r) {
            double acc = 0.0;
            for (int k = 0; k < width; ++k) {
                acc += rows[r * width + k];
                s.cum[r * width + k] = acc;
            }
        }
        return s;
    }

    int draw(std::mt19937_64& rng, std::size_t row) const {
        const double u = unit_uniform(rng);
        const double total = cum[row * width + (width - 1)];
        const double target = u * total;
        for (int k = 0; k < width; ++k) {
            if (cum[row * width + k] >= target && cum[row * width + k] > 0.0) return k;
        }
        return width - 1;
    }
};

// Normalized conditional rows P(out | given...) with the given axes packed in
// the listed order; zero-mass rows stay all-zero.
struct CondTable {
    std::vector<int> given_sizes;
    int out_size = 0;
    std::vector<double> rows;  // [given-cell * out_size + out]

    std::size_t row_index(const int* given_digits) const {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < given_sizes.size(); ++i) {
            idx = idx * static_cast<std::size_t>(given_sizes[i]) +
                  static_cast<std::size_t>(given_digits[i]);
        }
        return idx;
    }
};

CondTable cond_table(const JointDist& j, const VarSet& given, const std::string& out) {
    VarSet keep = given;
    keep.push_back(out);
    const JointDist m = marginalize(j, keep);
    CondTable t;
    std::size_t row_count = 1;
    for (const std::string& g : given) {
        t.given_sizes.push_back(m.axis(g).size());
        row_count *= static_cast<std::size_t>(m.axis(g).size());
    }
    t.out_size = m.axis(out).size();
    t.rows.assign(row_count * static_cast<std::size_t>(t.out_size), 0.0);

    std::vector<int> digits(static_cast<std::size_t>(m.rank()));
    std::vector<int> gidx;
    for (const std::string& g : given) gidx.push_back(m.axis_index(g));
    const int oidx = m.axis_index(out);
    std::vector<int> gdig(given.size());
    for (std::size_t cell = 0; cell < m.cells(); ++cell) {
        const double p = m.mass()[cell];
        if (p <= 0.0) continue;
        m.decode_cell(cell, digits.data());
        for (std::size_t i = 0; i < gidx.size(); ++i) gdig[i] = digits[static_cast<std::size_t>(gidx[i])];
        t.rows[t.row_index(gdig.data()) * static_cast<std::size_t>(t.out_size) +
               static_cast<std::size_t>(digits[static_cast<std::size_t>(oidx)])] += p;
    }
    for (std::size_t r = 0; r < row_count; ++r) {
        double total = 0.0;
        for (int k = 0; k < t.out_size; ++k) {
            total += t.rows[r * static_cast<std::size_t>(t.out_size) + static_cast<std::size_t>(k)];
        }
        if (total > 0.0) {
            for (int k = 0; k < t.out_size; ++k) {
                t.rows[r * static_cast<std::size_t>(t.out_size) + static_cast<std::size_t>(k)] /= total;
            }
        }
    }
    return t;
}

// Joint conditional over an output pair, packed as o1 * n2 + o2.
CondTable pair_cond_table(const JointDist& j, const VarSet& given, const std::string& o1,
                          const std::string& o2) {
    VarSet keep = given;
    keep.push_back(o1);
    keep.push_back(o2);
    const JointDist m = marginalize(j, keep);
    CondTable t;
    std::size_t row_count = 1;
    for (const std::string& g : given) {
        t.given_sizes.push_back(m.axis(g).size());
        row_count *= static_cast<std::size_t>(m.axis(g).size());
    }
    const int n2 = m.axis(o2).size();
    t.out_size = m.axis(o1).size() * n2;
    t.rows.assign(row_count * static_cast<std::size_t>(t.out_size), 0.0);

    std::vector<int> digits(static_cast<std::size_t>(m.rank()));
    std::vector<int> gidx;
    for (const std::string& g : given) gidx.push_back(m.axis_index(g));
    const int i1 = m.axis_index(o1), i2 = m.axis_index(o2);
    std::vector<int> gdig(given.size());
    for (std::size_t cell = 0; cell < m.cells(); ++cell) {
        const double p = m.mass()[cell];
        if (p <= 0.0) continue;
        m.decode_cell(cell, digits.data());
        for (std::size_t i = 0; i < gidx.size(); ++i) gdig[i] = digits[static_cast<std::size_t>(gidx[i])];
        const std::size_t out = static_cast<std::size_t>(
            digits[static_cast<std::size_t>(i1)] * n2 + digits[static_cast<std::size_t>(i2)]);
        t.rows[t.row_index(gdig.data()) * static_cast<std::size_t>(t.out_size) + out] += p;
    }
    for (std::size_t r = 0; r < row_count; ++r) {
        double total = 0.0;
        for (int k = 0; k < t.out_size; ++k) total += t.rows[r * static_cast<std::size_t>(t.out_size) + static_cast<std::size_t>(k)];
        if (total > 0.0) {
            for (int k = 0; k < t.out_size; ++k) t.rows[r * static_cast<std::size_t>(t.out_size) + static_cast<std::size_t>(k)] /= total;
        }
    }
    return t;
}

double wilson_radius(std::uint64_t errors, std::uint64_t trials) {
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double z2 = kWilsonZ * kWilsonZ;
    const double denom = 1.0 + z2 / n;
    return kWilsonZ * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
}

} // namespace

BinRates default_rates(const SourceModel& model, const AuxSystem* aux, double epsilon) {
    if (!(std::isfinite(epsilon) && epsilon > 0.0)) {
        throw InvalidInput("epsilon must be positive");
    }
    BinRates r;
    if (aux == nullptr) {
        const JointDist j = build_joint(model);
        r.u1.f_rate = 0.0;
        r.u1.w_rate = std::max(0.0, conditional_entropy(j, {"X1"}, {"Y"}) + 4.0 * epsilon);
        r.u2.f_rate = 0.0;
        r.u2.w_rate =
            std::max(0.0, conditional_entropy(j, {"X2"}, {"X1", "Y"}) + 4.0 * epsilon);
        return r;
    }
    const JointDist j = induced_joint(model, *aux);
    r.v1.f_rate = std::max(0.0, conditional_entropy(j, {"V1"}, {"X1"}) - epsilon);
    r.v1.w_rate = std::max(0.0, mutual_information(j, {"V1"}, {"X1"}) -
                                    mutual_information(j, {"V1"}, {"Y"}) + 2.0 * epsilon);
    r.v2.f_rate = std::max(0.0, conditional_entropy(j, {"V2"}, {"X2"}) - epsilon);
    r.v2.w_rate = std::max(0.0, mutual_information(j, {"V2"}, {"X2"}) -
                                    mutual_information(j, {"V2"}, {"V1", "Y"}) + 2.0 * epsilon);
    r.u1.f_rate = std::max(0.0, conditional_entropy(j, {"U1"}, {"V1", "X1"}) - epsilon);
    r.u1.w_rate = std::max(0.0, mutual_information(j, {"U1"}, {"X1"}, {"V1"}) -
                                    mutual_information(j, {"U1"}, {"V2", "Y"}, {"V1"}) +
                                    2.0 * epsilon);
    r.u2.f_rate = std::max(0.0, conditional_entropy(j, {"U2"}, {"V2", "X2"}) - epsilon);
    r.u2.w_rate = std::max(0.0, mutual_information(j, {"U2"}, {"X2"}, {"V2"}) -
                                    mutual_information(j, {"U2"}, {"U1", "Y"}, {"V2"}) +
                                    2.0 * epsilon);
    return r;
}

BinAssignment make_binning(int n, const BinRates& rates, const SourceModel& model,
                           const AuxSystem* aux, std::uint64_t seed) {
    if (n < 1) throw InvalidInput("blocklength must be at least 1");
    check_rates(rates);
    model.validate();

    BinAssignment out;
    out.n = n;
    std::mt19937_64 rng(splitmix64(seed ^ 0xb117ab1eULL));

    if (aux == nullptr) {
        out.aux_mode = false;
        // One collapsed map per transmitter over measurement sequences.
        const LayerRates t1{rates.v1.f_rate + rates.u1.f_rate,
                            rates.v1.w_rate + rates.u1.w_rate};
        const LayerRates t2{rates.v2.f_rate + rates.u2.f_rate,
                            rates.v2.w_rate + rates.u2.w_rate};
        out.u1 = draw_layer(rng, pow_u64(model.x1.size(), n, "transmitter 1"), t1, n,
                            "transmitter 1");
        out.u2 = draw_layer(rng, pow_u64(model.x2.size(), n, "transmitter 2"), t2, n,
                            "transmitter 2");
        return out;
    }

    aux->validate(model);
    out.aux_mode = true;
    const AuxBranch& b = aux->branches.front();
    const int nv1 = b.v1.to_axes[0].size(), nv2 = b.v2.to_axes[0].size();
    const int nu1 = b.u1.to_axes[0].size(), nu2 = b.u2.to_axes[0].size();
    out.v1 = draw_layer(rng, pow_u64(nv1, n, "v1 layer"), rates.v1, n, "v1 layer");
    out.v2 = draw_layer(rng, pow_u64(nv2, n, "v2 layer"), rates.v2, n, "v2 layer");
    out.u1 = draw_layer(rng, pow_u64(nu1, n, "u1 layer"), rates.u1, n, "u1 layer");
    out.u2 = draw_layer(rng, pow_u64(nu2, n, "u2 layer"), rates.u2, n, "u2 layer");
    return out;
}

SimReport simulate_exact(const SourceModel& model, int n, const BinRates& rates,
                         std::uint64_t seed) {
    const FunctionClass cls = classify_function(model);
    if (cls != FunctionClass::invertible) {
        throw PreconditionError(std::string("function is not invertible: class is ") +
                                to_string(cls));
    }
    const double state_bits =
        static_cast<double>(n) *
        std::log2(static_cast<double>(model.x.size()) * model.x1.size() * model.x2.size() *
                  model.y.size() * model.z.size());
    if (state_bits > std::log2(1e8) + 1e-9) {
        throw PreconditionError("enumeration guard: joint sequence space exceeds 1e8 states");
    }

    const BinAssignment bins = make_binning(n, rates, model, nullptr, seed);
    const CombinedIndex ci1 = compress_layer(bins.u1);
    const CombinedIndex ci2 = compress_layer(bins.u2);

    const JointDist j = build_joint(model);
    const int n1 = model.x1.size(), n2 = model.x2.size();
    const int ny = model.y.size(), nz = model.z.size(), nx = model.x.size();
    const std::vector<double> p3y = letter_table(j, "X1", "X2", "Y");
    const std::vector<double> p3z = letter_table(j, "X1", "X2", "Z");
    const std::vector<double> p3x = letter_table(j, "X1", "X2", "X");

    const std::uint64_t S1 = bins.u1.seq_count, S2 = bins.u2.seq_count;
    const std::uint64_t SY = pow_u64(ny, n, "fusion observation");
    const std::uint64_t SZ = pow_u64(nz, n, "eavesdropper observation");
    const std::uint64_t SX = pow_u64(nx, n, "source");
    const std::vector<int> d1 = seq_digits(S1, n1, n);
    const std::vector<int> d2 = seq_digits(S2, n2, n);
    const std::vector<int> dy = seq_digits(SY, ny, n);
    const std::vector<int> dz = seq_digits(SZ, nz, n);
    const std::vector<int> dx = seq_digits(SX, nx, n);

    const std::uint64_t used1 = ci1.members.size(), used2 = ci2.members.size();
    const std::uint64_t fb1 = bins.u1.f_bins, fb2 = bins.u2.f_bins;
    for (std::uint64_t side : {SY, SZ, SX}) {
        if (used1 * used2 * side > kMaxTableCells || fb1 * fb2 * side > kMaxTableCells) {
            throw PreconditionError("leakage table guard: index space exceeds 2^22 cells");
        }
    }

    std::vector<Kahan> t_y(static_cast<std::size_t>(used1 * used2 * SY));
    std::vector<Kahan> t_z(static_cast<std::size_t>(used1 * used2 * SZ));
    std::vector<Kahan> t_x(static_cast<std::size_t>(used1 * used2 * SX));
    std::vector<Kahan> tf_y(static_cast<std::size_t>(fb1 * fb2 * SY));
    std::vector<Kahan> tf_z(static_cast<std::size_t>(fb1 * fb2 * SZ));
    std::vector<Kahan> tf_x(static_cast<std::size_t>(fb1 * fb2 * SX));

    // Decoder memo: (combined rank 1, combined rank 2, y-sequence) -> pair.
    std::vector<std::int64_t> memo(static_cast<std::size_t>(used1 * used2 * SY), -1);
    auto decode = [&](std::uint32_t r1, std::uint32_t r2, std::uint64_t sy) {
        const std::size_t key =
            static_cast<std::size_t>((static_cast<std::uint64_t>(r1) * used2 + r2) * SY + sy);
        if (memo[key] >= 0) return memo[key];
        const int* yd = &dy[static_cast<std::size_t>(sy) * n];
        double best = -1.0;
        std::uint64_t best_pair = 0;
        for (std::uint32_t a : ci1.members[r1]) {
            const int* ad = &d1[static_cast<std::size_t>(a) * n];
            for (std::uint32_t b : ci2.members[r2]) {
                const int* bd = &d2[static_cast<std::size_t>(b) * n];
                double p = 1.0;
                for (int i = 0; i < n; ++i) {
                    p *= p3y[static_cast<std::size_t>((ad[i] * n2 + bd[i]) * ny + yd[i])];
                    if (p <= 0.0) break;
                }
                if (p > best) {
                    best = p;
                    best_pair = static_cast<std::uint64_t>(a) * S2 + b;
                }
            }
        }
        memo[key] = static_cast<std::int64_t>(best_pair);
        return memo[key];
    };

    Kahan err;
    std::vector<int> ftrue(static_cast<std::size_t>(n)), fhat(static_cast<std::size_t>(n));
    for (std::uint64_t s1 = 0; s1 < S1; ++s1) {
        const int* ad = &d1[static_cast<std::size_t>(s1) * n];
        const std::uint32_t r1 = ci1.rank_of_seq[static_cast<std::size_t>(s1)];
        const std::uint32_t f1 = ci1.f_of_rank[r1];
        for (std::uint64_t s2 = 0; s2 < S2; ++s2) {
            const int* bd = &d2[static_cast<std::size_t>(s2) * n];
            const std::uint32_t r2 = ci2.rank_of_seq[static_cast<std::size_t>(s2)];
            const std::uint32_t f2 = ci2.f_of_rank[r2];
            const std::uint64_t rpair = static_cast<std::uint64_t>(r1) * used2 + r2;
            const std::uint64_t fpair = static_cast<std::uint64_t>(f1) * fb2 + f2;

            for (std::uint64_t sy = 0; sy < SY; ++sy) {
                const int* yd = &dy[static_cast<std::size_t>(sy) * n];
                double p = 1.0;
                for (int i = 0; i < n; ++i) {
                    p *= p3y[static_cast<std::size_t>((ad[i] * n2 + bd[i]) * ny + yd[i])];
                    if (p <= 0.0) break;
                }
                if (p <= 0.0) continue;
                t_y[static_cast<std::size_t>(rpair * SY + sy)].add(p);
                tf_y[static_cast<std::size_t>(fpair * SY + sy)].add(p);

                const std::uint64_t pair = static_cast<std::uint64_t>(decode(r1, r2, sy));
                const std::uint64_t h1 = pair / S2, h2 = pair % S2;
                const int* had = &d1[static_cast<std::size_t>(h1) * n];
                const int* hbd = &d2[static_cast<std::size_t>(h2) * n];
                bool wrong = false;
                for (int i = 0; i < n && !wrong; ++i) {
                    wrong = model.f_index(ad[i], bd[i], yd[i]) !=
                            model.f_index(had[i], hbd[i], yd[i]);
                }
                if (wrong) err.add(p);
            }
            for (std::uint64_t sz = 0; sz < SZ; ++sz) {
                const int* zd = &dz[static_cast<std::size_t>(sz) * n];
                double p = 1.0;
                for (int i = 0; i < n; ++i) {
                    p *= p3z[static_cast<std::size_t>((ad[i] * n2 + bd[i]) * nz + zd[i])];
                    if (p <= 0.0) break;
                }
                if (p <= 0.0) continue;
                t_z[static_cast<std::size_t>(rpair * SZ + sz)].add(p);
                tf_z[static_cast<std::size_t>(fpair * SZ + sz)].add(p);
            }
            for (std::uint64_t sx = 0; sx < SX; ++sx) {
                const int* xd = &dx[static_cast<std::size_t>(sx) * n];
                double p = 1.0;
                for (int i = 0; i < n; ++i) {
                    p *= p3x[static_cast<std::size_t>((ad[i] * n2 + bd[i]) * nx + xd[i])];
                    if (p <= 0.0) break;
                }
                if (p <= 0.0) continue;
                t_x[static_cast<std::size_t>(rpair * SX + sx)].add(p);
                tf_x[static_cast<std::size_t>(fpair * SX + sx)].add(p);
            }
        }
    }

    auto table_entropy = [](const std::vector<Kahan>& t) {
        Kahan h;
        for (const Kahan& cell : t) {
            if (cell.sum > 0.0) h.add(-cell.sum * std::log2(cell.sum));
        }
        return h.sum;
    };

    const double hy = table_entropy(t_y) - table_entropy(tf_y);
    const double hz = table_entropy(t_z) - table_entropy(tf_z);
    const double hx = table_entropy(t_x) - table_entropy(tf_x);

    SimReport rep;
    rep.n = n;
    rep.mode = SimReport::Mode::exact;
    rep.error_prob = std::clamp(err.sum, 0.0, 1.0);
    rep.secrecy_leak = finish_leakage(hz / n, "secrecy leakage");
    rep.priv_dec = finish_leakage((hy - hx) / n, "fusion-center privacy leakage");
    rep.priv_eve = finish_leakage((hz - hx) / n, "eavesdropper privacy leakage");
    rep.storage1 = std::log2(static_cast<double>(bins.u1.w_bins)) / n;
    rep.storage2 = std::log2(static_cast<double>(bins.u2.w_bins)) / n;
    return rep;
}

SimReport simulate_mc(const SourceModel& model, int n, const BinRates& rates,
                      std::uint64_t seed, std::uint64_t trials, const AuxSystem* aux) {
    if (trials < 1) throw InvalidInput("trial count must be at least 1");
    const BinAssignment bins = make_binning(n, rates, model, aux, seed);

    const JointDist j5 = build_joint(model);
    const int n1 = model.x1.size(), n2 = model.x2.size(), ny = model.y.size();

    // Per-letter samplers for the physical variables.
    const Sampler sx = Sampler::from_rows(model.p_x, model.x.size());
    const Sampler s1 = Sampler::from_rows(model.ch1.kernel, n1);
    const Sampler s2 = Sampler::from_rows(model.ch2.kernel, n2);
    std::vector<double> py_rows(static_cast<std::size_t>(model.x.size()) * ny, 0.0);
    for (int xv = 0; xv < model.x.size(); ++xv) {
        for (int yv = 0; yv < ny; ++yv) {
            for (int zv = 0; zv < model.z.size(); ++zv) {
                py_rows[static_cast<std::size_t>(xv) * ny + yv] +=
                    model.ch_yz.kernel[static_cast<std::size_t>(
                        (xv * ny + yv) * model.z.size() + zv)];
            }
        }
    }
    const Sampler sy = Sampler::from_rows(py_rows, ny);

    std::uint64_t errors = 0;

    if (aux == nullptr) {
        const CombinedIndex ci1 = compress_layer(bins.u1);
        const CombinedIndex ci2 = compress_layer(bins.u2);
        const std::vector<double> p3y = letter_table(j5, "X1", "X2", "Y");
        std::vector<int> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n)),
            yv(static_cast<std::size_t>(n));
        std::vector<int> adHat(static_cast<std::size_t>(n)), bdHat(static_cast<std::size_t>(n));

        for (std::uint64_t t = 0; t < trials; ++t) {
            std::mt19937_64 rng(mix_seed(seed, 0x7714a15eULL, t));
            std::uint64_t r1 = 0, r2 = 0;
            for (int i = 0; i < n; ++i) {
                const int xv = sx.draw(rng, 0);
                a[static_cast<std::size_t>(i)] = s1.draw(rng, static_cast<std::size_t>(xv));
                b[static_cast<std::size_t>(i)] = s2.draw(rng, static_cast<std::size_t>(xv));
                yv[static_cast<std::size_t>(i)] = sy.draw(rng, static_cast<std::size_t>(xv));
                r1 = r1 * static_cast<std::uint64_t>(n1) +
                     static_cast<std::uint64_t>(a[static_cast<std::size_t>(i)]);
                r2 = r2 * static_cast<std::uint64_t>(n2) +
                     static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]);
            }
            const std::uint32_t c1 = ci1.rank_of_seq[static_cast<std::size_t>(r1)];
            const std::uint32_t c2 = ci2.rank_of_seq[static_cast<std::size_t>(r2)];

            double best = -1.0;
            std::uint64_t best1 = 0, best2 = 0;
            for (std::uint32_t ca : ci1.members[c1]) {
                for (std::uint32_t cb : ci2.members[c2]) {
                    double p = 1.0;
                    std::uint64_t ra = ca, rb = cb;
                    // Digits decoded LSB-first; positions are symmetric in the
                    // product, so the order of factors does not matter.
                    for (int i = 0; i < n; ++i) {
                        const int av = static_cast<int>(ra % static_cast<std::uint64_t>(n1));
                        const int bv = static_cast<int>(rb % static_cast<std::uint64_t>(n2));
                        ra /= static_cast<std::uint64_t>(n1);
                        rb /= static_cast<std::uint64_t>(n2);
                        p *= p3y[static_cast<std::size_t>(
                            (av * n2 + bv) * ny + yv[static_cast<std::size_t>(n - 1 - i)])];
                        if (p <= 0.0) break;
                    }
                    if (p > best) {
                        best = p;
                        best1 = ca;
                        best2 = cb;
                    }
                }
            }
            std::uint64_t ra = best1, rb = best2;
            for (int i = n - 1; i >= 0; --i) {
                adHat[static_cast<std::size_t>(i)] =
                    static_cast<int>(ra % static_cast<std::uint64_t>(n1));
                bdHat[static_cast<std::size_t>(i)] =
                    static_cast<int>(rb % static_cast<std::uint64_t>(n2));
                ra /= static_cast<std::uint64_t>(n1);
                rb /= static_cast<std::uint64_t>(n2);
            }
            for (int i = 0; i < n; ++i) {
                if (model.f_index(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i)],
                                  yv[static_cast<std::size_t>(i)]) !=
                    model.f_index(adHat[static_cast<std::size_t>(i)],
                                  bdHat[static_cast<std::size_t>(i)],
                                  yv[static_cast<std::size_t>(i)])) {
                    ++errors;
                    break;
                }
            }
        }

        SimReport rep;
        rep.n = n;
        rep.mode = SimReport::Mode::monte_carlo;
        rep.error_prob = static_cast<double>(errors) / static_cast<double>(trials);
        rep.confidence = wilson_radius(errors, trials);
        rep.storage1 = std::log2(static_cast<double>(bins.u1.w_bins)) / n;
        rep.storage2 = std::log2(static_cast<double>(bins.u2.w_bins)) / n;
        return rep;
    }

    // Aux mode: sample the induced per-letter system, encode through all four
    // layers, run the successive decoder V1 -> V2 -> U1 -> U2.
    const JointDist ind = induced_joint(model, *aux);
    const JointDist indf = with_function_axis(model, ind);
    const AuxBranch& br = aux->branches.front();
    const int nv1 = br.v1.to_axes[0].size(), nv2 = br.v2.to_axes[0].size();
    const int nu1 = br.u1.to_axes[0].size(), nu2 = br.u2.to_axes[0].size();
    const int nq = aux->q.size();

    const Sampler sq = Sampler::from_rows(aux->weights, nq);
    const CondTable pair1 = pair_cond_table(ind, {"Q", "X1"}, "U1", "V1");
    const CondTable pair2 = pair_cond_table(ind, {"Q", "X2"}, "U2", "V2");
    const Sampler sp1 = Sampler::from_rows(pair1.rows, pair1.out_size);
    const Sampler sp2 = Sampler::from_rows(pair2.rows, pair2.out_size);

    const CondTable tv1 = cond_table(ind, {"Q", "Y"}, "V1");
    const CondTable tv2 = cond_table(ind, {"Q", "Y", "V1"}, "V2");
    const CondTable tu1 = cond_table(ind, {"Q", "Y", "V1", "V2"}, "U1");
    const CondTable tu2 = cond_table(ind, {"Q", "Y", "V1", "V2", "U1"}, "U2");
    const CondTable tf = cond_table(indf, {"Q", "Y", "U1", "U2"}, "F");

    const CombinedIndex cv1 = compress_layer(bins.v1);
    const CombinedIndex cv2 = compress_layer(bins.v2);
    const CombinedIndex cu1 = compress_layer(bins.u1);
    const CombinedIndex cu2 = compress_layer(bins.u2);

    std::vector<int> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n)),
        yv(static_cast<std::size_t>(n)), qv(static_cast<std::size_t>(n));
    std::vector<int> u1s(static_cast<std::size_t>(n)), v1s(static_cast<std::size_t>(n));
    std::vector<int> u2s(static_cast<std::size_t>(n)), v2s(static_cast<std::size_t>(n));
    std::vector<int> v1h(static_cast<std::size_t>(n)), v2h(static_cast<std::size_t>(n));
    std::vector<int> u1h(static_cast<std::size_t>(n)), u2h(static_cast<std::size_t>(n));
    auto rank_of = [](const std::vector<int>& digits, int base) {
        std::uint64_t r = 0;
        for (int d : digits) r = r * static_cast<std::uint64_t>(base) + static_cast<std::uint64_t>(d);
        return r;
    };

    auto decode_layer = [&](const CombinedIndex& ci, int base, std::uint32_t rank,
                            const CondTable& table, const auto& row_of,
                            std::vector<int>& out) {
        double bestp = -1.0;
        std::uint64_t bseq = 0;
        std::vector<int> digits(static_cast<std::size_t>(n));
        for (std::uint32_t cand : ci.members[rank]) {
            std::uint64_t rest = cand;
            for (int i = n - 1; i >= 0; --i) {
                digits[static_cast<std::size_t>(i)] =
                    static_cast<int>(rest % static_cast<std::uint64_t>(base));
                rest /= static_cast<std::uint64_t>(base);
            }
            double p = 1.0;
            for (int i = 0; i < n; ++i) {
                p *= table.rows[row_of(i) * static_cast<std::size_t>(table.out_size) +
                                static_cast<std::size_t>(digits[static_cast<std::size_t>(i)])];
                if (p <= 0.0) break;
            }
            if (p > bestp) {
                bestp = p;
                bseq = cand;
            }
        }
        std::uint64_t rest = bseq;
        for (int i = n - 1; i >= 0; --i) {
            out[static_cast<std::size_t>(i)] =
                static_cast<int>(rest % static_cast<std::uint64_t>(base));
            rest /= static_cast<std::uint64_t>(base);
        }
    };

    for (std::uint64_t t = 0; t < trials; ++t) {
        std::mt19937_64 rng(mix_seed(seed, 0x7714a15eULL, t));
        for (int i = 0; i < n; ++i) {
            const std::size_t ii = static_cast<std::size_t>(i);
            const int xv = sx.draw(rng, 0);
            a[ii] = s1.draw(rng, static_cast<std::size_t>(xv));
            b[ii] = s2.draw(rng, static_cast<std::size_t>(xv));
            yv[ii] = sy.draw(rng, static_cast<std::size_t>(xv));
            qv[ii] = sq.draw(rng, 0);
            const int p1 = sp1.draw(
                rng, static_cast<std::size_t>(qv[ii]) * static_cast<std::size_t>(n1) +
                         static_cast<std::size_t>(a[ii]));
            u1s[ii] = p1 / nv1;
            v1s[ii] = p1 % nv1;
            const int p2 = sp2.draw(
                rng, static_cast<std::size_t>(qv[ii]) * static_cast<std::size_t>(n2) +
                         static_cast<std::size_t>(b[ii]));
            u2s[ii] = p2 / nv2;
            v2s[ii] = p2 % nv2;
        }

        const std::uint32_t rv1 = cv1.rank_of_seq[static_cast<std::size_t>(rank_of(v1s, nv1))];
        const std::uint32_t rv2 = cv2.rank_of_seq[static_cast<std::size_t>(rank_of(v2s, nv2))];
        const std::uint32_t ru1 = cu1.rank_of_seq[static_cast<std::size_t>(rank_of(u1s, nu1))];
        const std::uint32_t ru2 = cu2.rank_of_seq[static_cast<std::size_t>(rank_of(u2s, nu2))];

        decode_layer(cv1, nv1, rv1, tv1,
                     [&](int i) {
                         const std::size_t ii = static_cast<std::size_t>(i);
                         return (static_cast<std::size_t>(qv[ii]) * static_cast<std::size_t>(ny) +
                                 static_cast<std::size_t>(yv[ii]));
                     },
                     v1h);
        decode_layer(cv2, nv2, rv2, tv2,
                     [&](int i) {
                         const std::size_t ii = static_cast<std::size_t>(i);
                         return ((static_cast<std::size_t>(qv[ii]) * static_cast<std::size_t>(ny) +
                                  static_cast<std::size_t>(yv[ii])) *
                                     static_cast<std::size_t>(nv1) +
                                 static_cast<std::size_t>(v1h[ii]));
                     },
                     v2h);
        decode_layer(cu1, nu1, ru1, tu1,
                     [&](int i) {
                         const std::size_t ii = static_cast<std::size_t>(i);
                         return (((static_cast<std::size_t>(qv[ii]) * static_cast<std::size_t>(ny) +
                                   static_cast<std::size_t>(yv[ii])) *
                                      static_cast<std::size_t>(nv1) +
                                  static_cast<std::size_t>(v1h[ii])) *
                                     static_cast<std::size_t>(nv2) +
                                 static_cast<std::size_t>(v2h[ii]));
                     },
                     u1h);
        decode_layer(cu2, nu2, ru2, tu2,
                     [&](int i) {
                         const std::size_t ii = static_cast<std::size_t>(i);
                         return ((((static_cast<std::size_t>(qv[ii]) * static_cast<std::size_t>(ny) +
                                    static_cast<std::size_t>(yv[ii])) *
                                       static_cast<std::size_t>(nv1) +
                                   static_cast<std::size_t>(v1h[ii])) *
                                      static_cast<std::size_t>(nv2) +
                                  static_cast<std::size_t>(v2h[ii])) *
                                     static_cast<std::size_t>(nu1) +
                                 static_cast<std::size_t>(u1h[ii]));
                     },
                     u2h);

        bool wrong = false;
        for (int i = 0; i < n && !wrong; ++i) {
            const std::size_t ii = static_cast<std::size_t>(i);
            const std::size_t frow =
                ((static_cast<std::size_t>(qv[ii]) * static_cast<std::size_t>(ny) +
                  static_cast<std::size_t>(yv[ii])) *
                     static_cast<std::size_t>(nu1) +
                 static_cast<std::size_t>(u1h[ii])) *
                    static_cast<std::size_t>(nu2) +
                static_cast<std::size_t>(u2h[ii]);
            int fh = 0;
            double bestp = 0.0;
            for (int fv = 0; fv < tf.out_size; ++fv) {
                const double p = tf.rows[frow * static_cast<std::size_t>(tf.out_size) +
                                         static_cast<std::size_t>(fv)];
                if (p > bestp) {
                    bestp = p;
                    fh = fv;
                }
            }
            wrong = fh != model.f_index(a[ii], b[ii], yv[ii]);
        }
        if (wrong) ++errors;
    }

    SimReport rep;
    rep.n = n;
    rep.mode = SimReport::Mode::monte_carlo;
    rep.error_prob = static_cast<double>(errors) / static_cast<double>(trials);
    rep.confidence = wilson_radius(errors, trials);
    rep.storage1 = (std::log2(static_cast<double>(bins.v1.w_bins)) +
                    std::log2(static_cast<double>(bins.u1.w_bins))) /
                   n;
    rep.storage2 = (std::log2(static_cast<double>(bins.v2.w_bins)) +
                    std::log2(static_cast<double>(bins.u2.w_bins))) /
                   n;
    return rep;
}

} // namespace fcomp
