#include "fcomp/aux_search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <thread>

#include "fcomp/errors.hpp"
#include "fcomp/rng.hpp"

namespace fcomp {
namespace {

struct Cardinalities {
    int u1, u2, v1, v2, q;
};

int resolve_card(int requested, int fallback, int cap, const char* label) {
    const int value = requested == 0 ? std::min(fallback, cap) : requested;
    if (value < 1 || value > cap) {
        std::ostringstream err;
        err << "infeasible cardinality for " << label << ": " << value
            << " outside [1, " << cap << "]";
        throw InvalidInput(err.str());
    }
    return value;
}

Cardinalities resolve_cards(const SourceModel& model, const SearchConfig& cfg) {
    const int extra = cfg.mode == SearchMode::lossless ? 6 : 7;
    const int n1 = model.x1.size(), n2 = model.x2.size();
    Cardinalities c{};
    c.u1 = resolve_card(cfg.card_u1, n1 + 1, (n1 + extra) * (n1 + extra), "U1");
    c.u2 = resolve_card(cfg.card_u2, n2 + 1, (n2 + extra) * (n2 + extra), "U2");
    c.v1 = resolve_card(cfg.card_v1, 2, n1 + extra, "V1");
    c.v2 = resolve_card(cfg.card_v2, 2, n2 + extra, "V2");
    c.q = resolve_card(cfg.card_q, 1, 2, "Q");
    return c;
}

Alphabet numbered_alphabet(const std::string& name, const char* prefix, int n) {
    Alphabet a{name, {}};
    a.symbols.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) a.symbols.push_back(prefix + std::to_string(i));
    return a;
}

std::vector<double> random_pmf(std::mt19937_64& rng, int n) {
    std::vector<double> p(static_cast<std::size_t>(n));
    double total = 0.0;
    for (double& v : p) {
        v = -std::log(unit_uniform(rng));
        total += v;
    }
    for (double& v : p) v /= total;
    return p;
}

Channel random_channel(std::mt19937_64& rng, const Alphabet& from, const Alphabet& to) {
    Channel ch{{from}, {to}, {}};
    ch.kernel.reserve(static_cast<std::size_t>(from.size()) * to.size());
    for (int r = 0; r < from.size(); ++r) {
        for (double v : random_pmf(rng, to.size())) ch.kernel.push_back(v);
    }
    return ch;
}

AuxSystem random_aux(const SourceModel& model, const Cardinalities& cards,
                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Alphabet u1 = numbered_alphabet("U1", "u", cards.u1);
    const Alphabet v1 = numbered_alphabet("V1", "v", cards.v1);
    const Alphabet u2 = numbered_alphabet("U2", "u", cards.u2);
    const Alphabet v2 = numbered_alphabet("V2", "v", cards.v2);
    AuxSystem a;
    a.q = numbered_alphabet("Q", "q", cards.q);
    a.weights = random_pmf(rng, cards.q);
    for (int qi = 0; qi < cards.q; ++qi) {
        AuxBranch b;
        b.u1 = random_channel(rng, model.x1, u1);
        b.v1 = random_channel(rng, u1, v1);
        b.u2 = random_channel(rng, model.x2, u2);
        b.v2 = random_channel(rng, u2, v2);
        a.branches.push_back(std::move(b));
    }
    return a;
}

struct Candidate {
    AuxSystem aux;
    RateBounds bounds;
    double residual = 0.0;  // H(f | U1, U2, Y, Q), lossless mode
    double score = 0.0;
};

Candidate evaluate_candidate(const SourceModel& model, const SearchConfig& cfg,
                             const std::vector<double>& weights, AuxSystem aux) {
    Candidate c;
    if (cfg.mode == SearchMode::lossless) {
        const JointDist full = induced_joint(model, aux);
        c.bounds = detail::inner_expressions(full);
        c.residual = conditional_entropy(with_function_axis(model, full), {"F"},
                                         {"U1", "U2", "Y", "Q"});
        c.score = scalarize(c.bounds, weights) + cfg.penalty * c.residual;
    } else {
        c.bounds = eval_inner_lossy(model, aux, {});
        c.score = scalarize(c.bounds, weights);
    }
    c.aux = std::move(aux);
    return c;
}

int objective_count(const SearchConfig& cfg) {
    return cfg.mode == SearchMode::lossless ? 6 : 7;
}

std::vector<double> resolve_weights(const SearchConfig& cfg) {
    const int k = objective_count(cfg);
    if (cfg.weights.empty()) {
        return std::vector<double>(static_cast<std::size_t>(k), 1.0 / k);
    }
    if (static_cast<int>(cfg.weights.size()) != k) {
        throw InvalidInput("expected " + std::to_string(k) + " scalarization weights, got " +
                           std::to_string(cfg.weights.size()));
    }
    double total = 0.0;
    for (double w : cfg.weights) {
        if (!(std::isfinite(w) && w >= 0.0)) {
            throw InvalidInput("scalarization weights must be finite and nonnegative");
        }
        total += w;
    }
    if (total <= 0.0) throw InvalidInput("scalarization weights must not all be zero");
    return cfg.weights;
}

std::vector<double> bound_vector(const RateBounds& b) {
    std::vector<double> v{b.r_s, b.r_w1, b.r_w2, b.r_w_sum, b.r_l_dec, b.r_l_eve};
    if (b.d) v.push_back(*b.d);
    return v;
}

// a dominates b: <= everywhere, < somewhere.
bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strict = true;
    }
    return strict;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void serialize_matrix(std::ostringstream& out, const Channel& ch) {
    out << ch.from_axes[0].size() << 'x' << ch.to_axes[0].size();
    char buf[40];
    for (double v : ch.kernel) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        out << buf;
    }
}

} // namespace

std::string aux_fingerprint(const AuxSystem& aux) {
    std::ostringstream s;
    s << "q=" << aux.q.size();
    char buf[40];
    for (double w : aux.weights) {
        std::snprintf(buf, sizeof buf, ",%.17g", w);
        s << buf;
    }
    for (const AuxBranch& b : aux.branches) {
        s << "|u1:";
        serialize_matrix(s, b.u1);
        s << "|v1:";
        serialize_matrix(s, b.v1);
        s << "|u2:";
        serialize_matrix(s, b.u2);
        s << "|v2:";
        serialize_matrix(s, b.v2);
    }
    const std::uint64_t h = fnv1a(s.str());
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return std::string(hex);
}

double scalarize(const RateBounds& bounds, const std::vector<double>& weights) {
    const std::vector<double> v = bound_vector(bounds);
    if (weights.size() != v.size()) {
        throw InvalidInput("scalarization expects " + std::to_string(v.size()) +
                           " weights for these bounds, got " + std::to_string(weights.size()));
    }
    double score = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) score += weights[i] * v[i];
    return score;
}

AuxSystem local_step(const AuxSystem& aux, double scale, std::uint64_t seed) {
    if (!(std::isfinite(scale) && scale >= 0.0)) {
        throw InvalidInput("perturbation scale must be nonnegative");
    }
    const double s = std::min(scale, 1.0);
    std::mt19937_64 rng(splitmix64(seed));

    AuxSystem out = aux;
    // Uniform choice over every conditional row of every branch channel.
    std::vector<std::pair<Channel*, int>> rows;
    for (AuxBranch& b : out.branches) {
        for (Channel* ch : {&b.u1, &b.v1, &b.u2, &b.v2}) {
            for (int r = 0; r < ch->from_axes[0].size(); ++r) rows.push_back({ch, r});
        }
    }
    const auto [ch, row] = rows[bounded(rng, rows.size())];
    const int width = ch->to_axes[0].size();
    const std::vector<double> e = random_pmf(rng, width);
    for (int ccol = 0; ccol < width; ++ccol) {
        double& cell = ch->kernel[static_cast<std::size_t>(row) * width + ccol];
        cell = (1.0 - s) * cell + s * e[static_cast<std::size_t>(ccol)];
    }
    return out;
}

int worker_count() {
    if (const char* env = std::getenv("FCOMP_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) {
            return static_cast<int>(std::min(v, 64L));
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
}

ParetoFront search_inner(const SourceModel& model, const SearchConfig& cfg) {
    model.validate();
    if (cfg.restarts < 1) throw InvalidInput("search needs at least one restart");
    if (cfg.iterations < 0) throw InvalidInput("iteration count must be nonnegative");
    if (!(std::isfinite(cfg.scale) && cfg.scale > 0.0)) {
        throw InvalidInput("perturbation scale must be positive");
    }
    if (!(std::isfinite(cfg.penalty) && cfg.penalty >= 0.0)) {
        throw InvalidInput("admissibility penalty must be nonnegative");
    }
    if (!(std::isfinite(cfg.tol_adm) && cfg.tol_adm >= 0.0)) {
        throw InvalidInput("admissibility tolerance must be nonnegative");
    }
    if (cfg.mode == SearchMode::lossy && !model.distortion) {
        throw PreconditionError("lossy search needs a model with a distortion metric");
    }
    const Cardinalities cards = resolve_cards(model, cfg);
    const std::vector<double> weights = resolve_weights(cfg);

    // Canonical seeds are always among the candidates.
    std::vector<Candidate> canonical;
    canonical.push_back(evaluate_candidate(model, cfg, weights, identity_aux(model)));
    canonical.push_back(evaluate_candidate(model, cfg, weights, constant_aux(model)));

    auto run_restart = [&](int r) {
        std::vector<Candidate> found;
        found.reserve(static_cast<std::size_t>(cfg.iterations) + 1);
        AuxSystem start;
        if (r == 0) {
            start = identity_aux(model);
        } else if (r == 1) {
            start = constant_aux(model);
        } else {
            start = random_aux(model, cards, mix_seed(cfg.seed, 0x5eedba5eULL, r));
        }
        Candidate cur = evaluate_candidate(model, cfg, weights, std::move(start));
        found.push_back(cur);
        for (int it = 0; it < cfg.iterations; ++it) {
            AuxSystem prop = local_step(cur.aux, cfg.scale, mix_seed(cfg.seed, r, it));
            Candidate cand = evaluate_candidate(model, cfg, weights, std::move(prop));
            found.push_back(cand);
            if (cand.score < cur.score) cur = std::move(cand);
        }
        return found;
    };

    std::vector<std::vector<Candidate>> per_restart(static_cast<std::size_t>(cfg.restarts));
    const int workers = std::min(worker_count(), cfg.restarts);
    if (workers <= 1) {
        for (int r = 0; r < cfg.restarts; ++r) per_restart[static_cast<std::size_t>(r)] = run_restart(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int r = next.fetch_add(1); r < cfg.restarts; r = next.fetch_add(1)) {
                    per_restart[static_cast<std::size_t>(r)] = run_restart(r);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }

    // Deterministic merge order: canonical seeds, then restarts by index.
    std::vector<Candidate> all = std::move(canonical);
    for (std::vector<Candidate>& found : per_restart) {
        for (Candidate& c : found) all.push_back(std::move(c));
    }

    ParetoFront front;
    std::vector<std::vector<double>> vectors;
    for (Candidate& c : all) {
        if (cfg.mode == SearchMode::lossless && c.residual > cfg.tol_adm) continue;
        std::vector<double> v = bound_vector(c.bounds);

        bool drop = false;
        std::size_t equal_at = front.size();
        for (std::size_t i = 0; i < front.size() && !drop; ++i) {
            if (vectors[i] == v) {
                equal_at = i;
            } else if (dominates(vectors[i], v)) {
                drop = true;
            }
        }
        if (drop) continue;

        std::string fp = aux_fingerprint(c.aux);
        if (equal_at < front.size()) {
            // Same bound vector already on the front: keep the smaller
            // fingerprint so ties are schedule-independent.
            if (fp < front[equal_at].fingerprint) {
                front[equal_at] = ParetoPoint{std::move(fp), std::move(c.aux), c.bounds};
            }
            continue;
        }
        for (std::size_t i = front.size(); i-- > 0;) {
            if (dominates(v, vectors[i])) {
                front.erase(front.begin() + static_cast<std::ptrdiff_t>(i));
                vectors.erase(vectors.begin() + static_cast<std::ptrdiff_t>(i));
            }
        }
        front.push_back(ParetoPoint{std::move(fp), std::move(c.aux), c.bounds});
        vectors.push_back(std::move(v));
    }

    std::vector<std::size_t> order(front.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (vectors[a] != vectors[b]) return vectors[a] < vectors[b];
        return front[a].fingerprint < front[b].fingerprint;
    });
    ParetoFront sorted;
    sorted.reserve(front.size());
    for (std::size_t i : order) sorted.push_back(std::move(front[i]));
    return sorted;
}

} // namespace fcomp
