// Acceptance gate: one self-contained check per shipped guarantee, one
// printed PASS/FAIL line each.  Exit status is the number of failures.
//
// Usage: acceptance --cli /path/to/fcomp

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fcomp/aux_search.hpp"
#include "fcomp/binning.hpp"
#include "fcomp/model.hpp"
#include "fcomp/prob.hpp"
#include "fcomp/regions.hpp"
#include "models.hpp"
#include "oracle.hpp"

using namespace fcomp;

namespace {

// Published reference values for the built-in Bernoulli example
// (b1=0.2, b2=0.11, alpha=0.3, q=0.25), rounded to four decimals.
constexpr double kRounded[6] = {0.7579, 0.4626, 0.3021, 0.7686, 0.1577, 0.1469};
constexpr double kPrintTol = 5e-5;   // |computed - published 4-dp value|
constexpr double kExactTol = 1e-12;  // algebraic identities
constexpr double kCalcTol = 1e-9;    // information-calculus properties
constexpr double kCornerTol = 1e-6;  // search-front containment

SourceModel example_model() { return bernoulli_example_model(0.2, 0.11, 0.3, 0.25); }

std::vector<double> six(const RateBounds& b) {
    return {b.r_s, b.r_w1, b.r_w2, b.r_w_sum, b.r_l_dec, b.r_l_eve};
}

double max_coordinate_gap(const RateBounds& a, const RateBounds& b) {
    const std::vector<double> va = six(a), vb = six(b);
    double worst = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        worst = std::max(worst, std::abs(va[i] - vb[i]));
    }
    return worst;
}

struct Criterion {
    int number;
    const char* label;
    std::function<bool(std::string&)> run;
};

// ---------------------------------------------------------------------------
// 1. CLI reproduction of the built-in example, through the real binary.

bool run_cli_example(const std::string& cli, std::string& detail) {
    const std::string cmd =
        cli + " evaluate --example-bernoulli 0.2 0.11 0.3 0.25 --lemma 4";
    const auto start = std::chrono::steady_clock::now();
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        detail = "could not start: " + cmd;
        return false;
    }
    std::string output;
    char buf[512];
    while (std::fgets(buf, sizeof buf, pipe)) output += buf;
    const int status = pclose(pipe);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (status != 0) {
        detail = "exit status " + std::to_string(status);
        return false;
    }
    if (elapsed >= 1.0) {
        detail = "took " + std::to_string(elapsed) + " s (budget 1 s)";
        return false;
    }

    // Find the data row and parse its six rate columns.
    std::istringstream lines(output);
    std::string line, row;
    while (std::getline(lines, line)) {
        if (line.rfind("lemma4,", 0) == 0) row = line;
    }
    if (row.empty()) {
        detail = "no lemma4 data row in output";
        return false;
    }
    std::vector<std::string> cells;
    std::istringstream cs(row);
    std::string cell;
    while (std::getline(cs, cell, ',')) cells.push_back(cell);
    if (cells.size() < 7) {
        detail = "short data row: " + row;
        return false;
    }
    for (int i = 0; i < 6; ++i) {
        const double v = std::stod(cells[static_cast<std::size_t>(i + 1)]);
        if (std::abs(v - kRounded[i]) > kPrintTol) {
            detail = "column " + std::to_string(i) + " = " + cells[i + 1] +
                     ", expected " + std::to_string(kRounded[i]) + " +/- 5e-5";
            return false;
        }
    }
    detail = "six rates match at 4 decimals in " + std::to_string(elapsed) + " s";
    return true;
}

// ---------------------------------------------------------------------------
// 2. The sum-storage constraint is strictly active on the example.

bool run_active_sum(std::string& detail) {
    const RateBounds b = eval_lemma4(example_model());
    const double pair_sum = b.r_w1 + b.r_w2;
    if (std::abs(pair_sum - 0.7647) > kPrintTol) {
        detail = "r_w1 + r_w2 = " + std::to_string(pair_sum);
        return false;
    }
    if (std::abs(b.r_w_sum - 0.7686) > kPrintTol) {
        detail = "r_w_sum = " + std::to_string(b.r_w_sum);
        return false;
    }
    if (!(b.r_w_sum - pair_sum > 1e-3)) {
        detail = "margin " + std::to_string(b.r_w_sum - pair_sum) + " not > 1e-3";
        return false;
    }
    detail = "r_w1 + r_w2 = 0.7647 < r_w_sum = 0.7686";
    return true;
}

// ---------------------------------------------------------------------------
// 3. Substitution identities across the closed forms.

bool run_substitution(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const SourceModel m = testing::random_binary_invertible_model(seed);
        worst = std::max(
            worst, max_coordinate_gap(eval_lemma2(m),
                                      eval_inner_lossless(m, identity_aux(m))));
    }
    double worst_eve = 0.0, worst_fusion = 0.0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const SourceModel me =
            testing::random_binary_invertible_model(seed, testing::Degrade::eve);
        worst_eve = std::max(worst_eve,
                             max_coordinate_gap(eval_lemma3(me), eval_lemma2(me)));
        const SourceModel mf =
            testing::random_binary_invertible_model(seed, testing::Degrade::fusion);
        worst_fusion = std::max(worst_fusion,
                                max_coordinate_gap(eval_lemma4(mf), eval_lemma2(mf)));
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (worst > kExactTol || worst_eve > kExactTol || worst_fusion > kExactTol) {
        detail = "max gaps " + std::to_string(worst) + " / " + std::to_string(worst_eve) +
                 " / " + std::to_string(worst_fusion) + " exceed 1e-12";
        return false;
    }
    if (elapsed >= 10.0) {
        detail = "took " + std::to_string(elapsed) + " s (budget 10 s)";
        return false;
    }
    detail = "160 models agree to 1e-12 in " + std::to_string(elapsed) + " s";
    return true;
}

// ---------------------------------------------------------------------------
// 4. Information-calculus property suite with an independent oracle.

bool run_calculus(std::string& detail) {
    std::mt19937_64 rng(20240817ULL);
    int checked = 0;
    for (int round = 0; round < 1000; ++round) {
        const JointDist d = testing::random_joint(rng);
        const VarSet a{"A0"}, b{"A1"};

        const double h_ab = entropy(d, {"A0", "A1"});
        const double h_a = entropy(d, {"A0"});
        const double h_b_given_a = conditional_entropy(d, b, a);
        if (std::abs(h_ab - h_a - h_b_given_a) > kCalcTol) {
            detail = "chain rule off by " + std::to_string(h_ab - h_a - h_b_given_a);
            return false;
        }

        const double mi = mutual_information(d, a, b);
        const double mi_flip = mutual_information(d, b, a);
        if (h_a < 0.0 || mi < 0.0) {
            detail = "negative entropy or mutual information";
            return false;
        }
        if (std::abs(mi - mi_flip) > kCalcTol) {
            detail = "asymmetric mutual information";
            return false;
        }
        if (conditional_entropy(d, a, b) > h_a + kCalcTol) {
            detail = "conditioning increased entropy";
            return false;
        }

        // Attaching a channel and integrating it back out is lossless.
        const JointDist marg = marginalize(d, {"A0"});
        const Channel ch =
            testing::random_channel(rng, {marg.axes()[0]}, testing::numbered_alphabet("B", 2));
        const JointDist joined = compose(marg, ch);
        const JointDist back = marginalize(joined, {"A0"});
        for (std::size_t c = 0; c < back.cells(); ++c) {
            if (std::abs(back.mass()[c] - marg.mass()[c]) > kCalcTol) {
                detail = "compose/marginalize round trip drifted";
                return false;
            }
        }

        // Every tenth round, cross-check against the brute-force oracle.
        if (round % 10 == 0) {
            const double want = d.rank() >= 3
                                    ? testing::oracle_cmi(d, a, b, {"A2"})
                                    : testing::oracle_cmi(d, a, b);
            const double got = d.rank() >= 3 ? mutual_information(d, a, b, {"A2"})
                                             : mutual_information(d, a, b);
            if (std::abs(want - got) > kExactTol) {
                detail = "oracle mismatch " + std::to_string(want - got);
                return false;
            }
            ++checked;
        }
    }
    detail = "1000 distributions pass; " + std::to_string(checked) +
             " oracle cross-checks at 1e-12";
    return true;
}

// ---------------------------------------------------------------------------
// 5. The exact simulator reproduces the closed-form leakages at n = 1.

bool run_simulator_consistency(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    const SourceModel m = example_model();
    BinRates rates;
    rates.u1.w_rate = 1.0;  // log2 of the binary measurement alphabet
    rates.u2.w_rate = 1.0;
    const SimReport rep = simulate_exact(m, 1, rates, 9);
    const RateBounds l4 = eval_lemma4(m);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!rep.secrecy_leak || !rep.priv_dec || !rep.priv_eve) {
        detail = "exact run reported no leakages";
        return false;
    }
    const double gap = std::max({std::abs(*rep.secrecy_leak - l4.r_s),
                                 std::abs(*rep.priv_dec - l4.r_l_dec),
                                 std::abs(*rep.priv_eve - l4.r_l_eve)});
    if (gap > kCalcTol) {
        detail = "worst leakage gap " + std::to_string(gap);
        return false;
    }
    if (elapsed >= 5.0) {
        detail = "took " + std::to_string(elapsed) + " s (budget 5 s)";
        return false;
    }
    detail = "three leakages match to 1e-9 in " + std::to_string(elapsed) + " s";
    return true;
}

// ---------------------------------------------------------------------------
// 6. Exact error is non-increasing as the stored rates sweep up at n = 3.

bool run_rate_sweep(std::string& detail) {
    const SourceModel m = example_model();
    const double steps[4] = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
    double previous = 2.0;
    std::string curve;
    for (double t : steps) {
        BinRates r;
        r.u1.w_rate = t;  // full entropy = 1 bit per binary measurement
        r.u2.w_rate = t;
        double avg = 0.0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            avg += simulate_exact(m, 3, r, seed).error_prob;
        }
        avg /= 10.0;
        if (!curve.empty()) curve += " >= ";
        curve += std::to_string(avg);
        if (avg > previous + kExactTol) {
            detail = "error rose along the sweep: " + curve;
            return false;
        }
        previous = avg;
    }
    detail = "averaged error over 10 seeds: " + curve;
    return true;
}

// ---------------------------------------------------------------------------
// 7. Lossy bounds: zero distortion with identity auxiliaries, and the
//    reconstruction map is a true argmin.

bool run_lossy(std::string& detail) {
    SourceModel m = example_model();
    add_hamming_distortion(m);
    const RateBounds ident = eval_inner_lossy(m, identity_aux(m));
    if (!ident.d || *ident.d != 0.0) {
        detail = "identity auxiliaries gave D = " +
                 (ident.d ? std::to_string(*ident.d) : std::string("absent"));
        return false;
    }

    // Brute-force the reconstruction map on two small systems and require the
    // built-in optimizer to hit the same minimum distortion.
    auto brute_matches = [&](const SourceModel& model, const AuxSystem& aux,
                             std::size_t cells, int nfh) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t total = 1;
        for (std::size_t c = 0; c < cells; ++c) total *= static_cast<std::size_t>(nfh);
        for (std::size_t code = 0; code < total; ++code) {
            ReconstructionMap g(cells, 0);
            std::size_t rest = code;
            for (std::size_t c = 0; c < cells; ++c) {
                g[c] = static_cast<int>(rest % static_cast<std::size_t>(nfh));
                rest /= static_cast<std::size_t>(nfh);
            }
            best = std::min(best, *eval_inner_lossy(model, aux, g).d);
        }
        return best == *eval_inner_lossy(model, aux).d;
    };

    // Constant auxiliaries on the example: 1*1*2 cells, 4 reconstructions.
    if (!brute_matches(m, constant_aux(m), 2, 4)) {
        detail = "constant-auxiliary reconstruction is not the argmin";
        return false;
    }

    // A binary-output function with identity auxiliaries: 2*2*2 cells over a
    // 2-symbol reconstruction alphabet.
    SourceModel proj = testing::random_binary_invertible_model(11);
    testing::make_project1(proj);
    add_hamming_distortion(proj);
    if (!brute_matches(proj, identity_aux(proj), 8, 2)) {
        detail = "projection-model reconstruction is not the argmin";
        return false;
    }

    detail = "D = 0 exactly; optimizer matches 4-map and 256-map brute force";
    return true;
}

// ---------------------------------------------------------------------------
// 8. The search front recovers the closed-form corner, deterministically.

bool run_search_recovery(std::string& detail) {
    const SourceModel m = example_model();
    SearchConfig cfg;
    cfg.seed = 7;
    cfg.restarts = 4;
    cfg.iterations = 60;

    const RateBounds corner = eval_lemma4(m);
    auto contains_corner = [&](const ParetoFront& front) {
        for (const ParetoPoint& p : front) {
            if (max_coordinate_gap(p.bounds, corner) <= kCornerTol) return true;
        }
        return false;
    };
    auto same_front = [](const ParetoFront& a, const ParetoFront& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].fingerprint != b[i].fingerprint) return false;
            if (six(a[i].bounds) != six(b[i].bounds)) return false;
        }
        return true;
    };

    unsetenv("FCOMP_WORKERS");
    const ParetoFront base = search_inner(m, cfg);
    setenv("FCOMP_WORKERS", "1", 1);
    const ParetoFront serial = search_inner(m, cfg);
    setenv("FCOMP_WORKERS", "4", 1);
    const ParetoFront quad = search_inner(m, cfg);
    unsetenv("FCOMP_WORKERS");

    if (!contains_corner(base)) {
        detail = "front misses the closed-form corner";
        return false;
    }
    if (!same_front(base, serial) || !same_front(base, quad)) {
        detail = "front depends on the worker count";
        return false;
    }
    detail = "corner found within 1e-6; identical under 1, 4, and default workers";
    return true;
}

} // namespace

int main(int argc, char** argv) {
    std::string cli;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
    }
    if (cli.empty()) {
        std::cerr << "usage: acceptance --cli /path/to/fcomp\n";
        return 64;
    }

    const std::vector<Criterion> criteria = {
        {1, "command-line reproduction of the built-in example",
         [&](std::string& d) { return run_cli_example(cli, d); }},
        {2, "strictly active sum-storage constraint", run_active_sum},
        {3, "substitution identities across closed forms", run_substitution},
        {4, "information-calculus property suite", run_calculus},
        {5, "simulator consistency with closed forms", run_simulator_consistency},
        {6, "error monotone in stored rate at blocklength 3", run_rate_sweep},
        {7, "lossy distortion and reconstruction argmin", run_lossy},
        {8, "search recovery of the closed-form corner", run_search_recovery},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        if (!ok) ++failures;
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.number << ": " << c.label
                  << " -- " << detail << "\n";
    }
    std::cout << (failures == 0 ? "all criteria passed"
                                : std::to_string(failures) + " criteria failed")
              << "\n";
    return failures;
}
