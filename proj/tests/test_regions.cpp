#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fcomp/model.hpp"
#include "fcomp/regions.hpp"
#include "models.hpp"
#include "oracle.hpp"

using namespace fcomp;
using doctest::Approx;
using testing::oracle_cmi;
using testing::oracle_entropy;

namespace {

SourceModel example() { return bernoulli_example_model(0.2, 0.11, 0.3, 0.25); }

void check_close(const RateBounds& a, const RateBounds& b, double tol) {
    CHECK(std::abs(a.r_s - b.r_s) <= tol);
    CHECK(std::abs(a.r_w1 - b.r_w1) <= tol);
    CHECK(std::abs(a.r_w2 - b.r_w2) <= tol);
    CHECK(std::abs(a.r_w_sum - b.r_w_sum) <= tol);
    CHECK(std::abs(a.r_l_dec - b.r_l_dec) <= tol);
    CHECK(std::abs(a.r_l_eve - b.r_l_eve) <= tol);
}

struct SixBounds {
    double r_s, r_w1, r_w2, r_w_sum, r_l_dec, r_l_eve;
};

// The six general achievable-rate expressions computed with the map-based
// oracle; `j` should come from testing::oracle_induced for full independence
// from the library's composition machinery.
SixBounds oracle_inner(const JointDist& j) {
    const VarSet uu{"U1", "U2"}, vvq{"V1", "V2", "Q"};
    double bracket = oracle_cmi(j, uu, {"Z"}, vvq) - oracle_cmi(j, uu, {"Y"}, vvq);
    if (bracket > 0.0) bracket = 0.0;
    SixBounds s{};
    s.r_s = bracket + oracle_cmi(j, uu, {"X1", "X2"}, {"Z"});
    s.r_w1 = oracle_cmi(j, {"V1"}, {"X1"}, {"V2", "Y"}) +
             oracle_cmi(j, {"U1"}, {"X1"}, {"V1", "U2", "Y"});
    s.r_w2 = oracle_cmi(j, {"V2"}, {"X2"}, {"V1", "Y"}) +
             oracle_cmi(j, {"U2"}, {"X2"}, {"U1", "V2", "Y"});
    s.r_w_sum = oracle_cmi(j, {"U2"}, {"X2"}, {"U1", "V2", "Y"}) +
                oracle_cmi(j, {"U1"}, {"X1"}, {"V1", "V2", "Y"}) +
                oracle_cmi(j, {"V2"}, {"X2"}, {"V1", "Y"}) +
                oracle_cmi(j, {"V1"}, {"X1"}, {"Y"});
    s.r_l_dec = oracle_cmi(j, uu, {"X"}, {"Y"});
    s.r_l_eve = bracket + oracle_cmi(j, uu, {"X"}, {"Z"});
    return s;
}

// Model in which both measurements are noiseless copies of the source and
// the fusion center observes the source directly.
SourceModel decoder_knows_inputs_model(std::uint64_t seed) {
    SourceModel m = testing::random_binary_invertible_model(seed);
    m.ch1 = Channel::identity(m.x, "X1");
    m.ch2 = Channel::identity(m.x, "X2");
    // y = x, z random.
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<double> k(8, 0.0);
    for (int xv = 0; xv < 2; ++xv) {
        const auto rz = testing::random_pmf(rng, 2);
        for (int zv = 0; zv < 2; ++zv) {
            k[static_cast<std::size_t>(xv * 4 + xv * 2 + zv)] = rz[static_cast<std::size_t>(zv)];
        }
    }
    m.ch_yz = Channel{{m.x}, {m.y, m.z}, std::move(k)};
    m.validate();
    return m;
}

// Model whose eavesdropper output is independent of everything else.
SourceModel independent_eve_model(std::uint64_t seed) {
    SourceModel m = testing::random_binary_invertible_model(seed);
    std::mt19937_64 rng(seed * 31 + 7);
    const auto py0 = testing::random_pmf(rng, 2), py1 = testing::random_pmf(rng, 2);
    const auto rz = testing::random_pmf(rng, 2);
    std::vector<double> k(8);
    for (int yv = 0; yv < 2; ++yv) {
        for (int zv = 0; zv < 2; ++zv) {
            k[static_cast<std::size_t>(0 * 4 + yv * 2 + zv)] =
                py0[static_cast<std::size_t>(yv)] * rz[static_cast<std::size_t>(zv)];
            k[static_cast<std::size_t>(1 * 4 + yv * 2 + zv)] =
                py1[static_cast<std::size_t>(yv)] * rz[static_cast<std::size_t>(zv)];
        }
    }
    m.ch_yz = Channel{{m.x}, {m.y, m.z}, std::move(k)};
    m.validate();
    return m;
}

} // namespace

TEST_CASE("published example values") {
    const RateBounds b = eval_lemma4(example());
    CHECK(b.origin == BoundOrigin::lemma4);
    CHECK_FALSE(b.d.has_value());

    // Frozen from an independent high-precision evaluation of the closed-form
    // expressions for this model.
    CHECK(b.r_s == Approx(0.7578701189727858).epsilon(1e-9));
    CHECK(b.r_w1 == Approx(0.4626268735799186).epsilon(1e-9));
    CHECK(b.r_w2 == Approx(0.3021205041510608).epsilon(1e-9));
    CHECK(b.r_w_sum == Approx(0.7685953667481942).epsilon(1e-9));
    CHECK(b.r_l_dec == Approx(0.1576733402222490).epsilon(1e-9));
    CHECK(b.r_l_eve == Approx(0.1469480924468406).epsilon(1e-9));

    // Four-decimal rounding matches the published figures.
    CHECK(std::abs(b.r_s - 0.7579) <= 5e-5);
    CHECK(std::abs(b.r_w1 - 0.4626) <= 5e-5);
    CHECK(std::abs(b.r_w2 - 0.3021) <= 5e-5);
    CHECK(std::abs(b.r_w_sum - 0.7686) <= 5e-5);
    CHECK(std::abs(b.r_l_dec - 0.1577) <= 5e-5);
    CHECK(std::abs(b.r_l_eve - 0.1469) <= 5e-5);

    // The sum constraint is strictly active for this model.
    CHECK(b.r_w1 + b.r_w2 < b.r_w_sum - 1e-3);

    SUBCASE("identity substitution reproduces the specialized bounds") {
        const RateBounds inner = eval_inner_lossless(example(), identity_aux(example()));
        CHECK(inner.origin == BoundOrigin::thm1_inner);
        check_close(inner, b, 1e-12);
    }
    SUBCASE("fully revealing observations collapse the bounds") {
        const SourceModel m = bernoulli_example_model(0.2, 0.11, 1.0, 1.0);  // Y = Z = X
        const RateBounds r = eval_lemma4(m);
        CHECK(r.r_l_eve == Approx(0.0).epsilon(1e-12));
        CHECK(r.r_s ==
              Approx(0.5 * (binary_entropy(0.2) + binary_entropy(0.11))).epsilon(1e-12));
    }
}

TEST_CASE("lemma preconditions") {
    SourceModel m = testing::random_binary_invertible_model(3);
    SUBCASE("non-invertible functions are rejected") {
        testing::make_and(m);
        CHECK_THROWS_WITH_AS(eval_lemma2(m), doctest::Contains("not invertible"),
                             PreconditionError);
        CHECK_THROWS_WITH_AS(eval_lemma1(m, identity_aux(m)),
                             doctest::Contains("not partially invertible"),
                             PreconditionError);
        testing::make_project2(m);
        CHECK_THROWS_AS(eval_lemma1(m, identity_aux(m)), PreconditionError);
    }
    SUBCASE("degradedness guards") {
        CHECK_THROWS_WITH_AS(eval_lemma3(example()), doctest::Contains("not degraded"),
                             PreconditionError);
        const SourceModel eve =
            testing::random_binary_invertible_model(5, testing::Degrade::eve);
        CHECK_THROWS_AS(eval_lemma4(eve), PreconditionError);
        CHECK_NOTHROW(eval_lemma3(eve));
    }
    SUBCASE("inadmissible auxiliaries are rejected") {
        CHECK_THROWS_WITH_AS(eval_inner_lossless(m, constant_aux(m)),
                             doctest::Contains("not admissible"), PreconditionError);
        // Lemma 1 with a collapsed U2 cannot resolve the identity-pair target.
        AuxSystem aux = identity_aux(m);
        aux.branches[0].u2 =
            Channel::deterministic({m.x2}, aux.branches[0].u2.to_axes[0], {0, 0});
        aux.validate(m);
        CHECK_THROWS_WITH_AS(eval_lemma1(m, aux), doctest::Contains("not admissible"),
                             PreconditionError);
    }
    SUBCASE("time-sharing alphabet cap") {
        const Channel big = Channel::deterministic(
            {m.x1, m.x2}, testing::numbered_alphabet("Q", 3), {0, 1, 2, 0});
        CHECK_THROWS_AS(eval_lemma2(m, big), PreconditionError);
    }
}

TEST_CASE("substitution identities on random invertible models") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const SourceModel m = testing::random_binary_invertible_model(seed);
        const RateBounds l2 = eval_lemma2(m);
        const RateBounds inner = eval_inner_lossless(m, identity_aux(m));
        check_close(l2, inner, 1e-12);
        const RateBounds l1 = eval_lemma1(m, identity_aux(m));
        check_close(l1, l2, 1e-12);
    }
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const SourceModel eve =
            testing::random_binary_invertible_model(seed, testing::Degrade::eve);
        check_close(eval_lemma3(eve), eval_lemma2(eve), 1e-12);
        const SourceModel fus =
            testing::random_binary_invertible_model(seed, testing::Degrade::fusion);
        check_close(eval_lemma4(fus), eval_lemma2(fus), 1e-12);
    }
}

TEST_CASE("general inner bounds against the direct-summation oracle") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const SourceModel m = testing::random_binary_invertible_model(seed);
        const AuxSystem aux = testing::random_admissible_aux(m, seed * 77 + 1, 2);
        const RateBounds lib = eval_inner_lossless(m, aux);
        const SixBounds ref = oracle_inner(testing::oracle_induced(m, aux));
        CHECK(lib.r_s == Approx(ref.r_s).epsilon(1e-9));
        CHECK(lib.r_w1 == Approx(ref.r_w1).epsilon(1e-9));
        CHECK(lib.r_w2 == Approx(ref.r_w2).epsilon(1e-9));
        CHECK(lib.r_w_sum == Approx(ref.r_w_sum).epsilon(1e-9));
        CHECK(lib.r_l_dec == Approx(ref.r_l_dec).epsilon(1e-9));
        CHECK(lib.r_l_eve == Approx(ref.r_l_eve).epsilon(1e-9));
    }
}

TEST_CASE("trivial collapses of the inner bounds") {
    SUBCASE("constant function with constant auxiliaries") {
        SourceModel m = testing::random_binary_invertible_model(9);
        testing::make_const(m);
        const RateBounds b = eval_inner_lossless(m, constant_aux(m));
        CHECK(b.r_s == 0.0);
        CHECK(b.r_w1 == 0.0);
        CHECK(b.r_w2 == 0.0);
        CHECK(b.r_w_sum == 0.0);
        CHECK(b.r_l_dec == 0.0);
        CHECK(b.r_l_eve == 0.0);
    }
    SUBCASE("decoder already sees both measurements") {
        const SourceModel m = decoder_knows_inputs_model(12);
        const RateBounds b = eval_inner_lossless(m, identity_aux(m));
        CHECK(b.r_w1 == Approx(0.0).epsilon(1e-12));
        CHECK(b.r_w2 == Approx(0.0).epsilon(1e-12));
        CHECK(b.r_w_sum == Approx(0.0).epsilon(1e-12));
        const RateBounds l2 = eval_lemma2(m);
        CHECK(l2.r_w1 == Approx(0.0).epsilon(1e-12));
        CHECK(l2.r_w2 == Approx(0.0).epsilon(1e-12));
        CHECK(l2.r_w_sum == Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("outer bounds") {
    const SourceModel m = testing::random_binary_invertible_model(17);
    SUBCASE("single-branch induced joints make the corrections vanish") {
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
            const AuxSystem aux = testing::random_admissible_aux(m, seed, 1);
            const JointDist j = induced_joint(m, aux);
            const RateBounds outer = eval_outer_lossless(j);
            CHECK(outer.origin == BoundOrigin::thm1_outer);
            check_close(outer, detail::inner_expressions(j), 1e-9);
        }
    }
    SUBCASE("time-shared joints keep outer storage at or below inner storage") {
        const AuxSystem aux = testing::random_admissible_aux(m, 5, 2);
        const JointDist j = induced_joint(m, aux);
        const RateBounds outer = eval_outer_lossless(j);
        const RateBounds inner = detail::inner_expressions(j);
        CHECK(outer.r_w1 <= inner.r_w1 + 1e-12);
        CHECK(outer.r_w2 <= inner.r_w2 + 1e-12);
        CHECK(outer.r_s == Approx(inner.r_s).epsilon(1e-12));
        CHECK(outer.r_w_sum == Approx(inner.r_w_sum).epsilon(1e-12));
        CHECK(outer.r_l_dec == Approx(inner.r_l_dec).epsilon(1e-12));
        CHECK(outer.r_l_eve == Approx(inner.r_l_eve).epsilon(1e-12));
    }
    SUBCASE("constant auxiliaries give the all-zero storage row") {
        SourceModel cm = m;
        testing::make_const(cm);
        const RateBounds outer = eval_outer_lossless(induced_joint(cm, constant_aux(cm)));
        CHECK(outer.r_w1 == Approx(0.0).epsilon(1e-12));
        CHECK(outer.r_w2 == Approx(0.0).epsilon(1e-12));
        CHECK(outer.r_w_sum == Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("chain violations are rejected") {
        // U1 copies the *second* measurement: the chain (Q,V1)-U1-X1-X-... breaks.
        JointDist j = build_joint(m);
        j = compose(j, Channel::identity(m.x2, "U1"));
        j = compose(j, Channel::constant({m.x1}, "V1"));
        j = compose(j, Channel::identity(m.x2, "U2"));
        j = compose(j, Channel::constant({m.x2}, "V2"));
        j = compose(j, Channel::constant({m.x}, "Q"));
        CHECK_THROWS_WITH_AS(eval_outer_lossless(j), doctest::Contains("Markov"),
                             PreconditionError);
    }
    SUBCASE("legitimately negative outer storage is surfaced, not clamped") {
        // V1 = V2 = a fair coin independent of everything else: both Markov
        // chains hold, yet the correction term exceeds the inner terms.
        JointDist j = build_joint(m);
        Channel shared;
        shared.from_axes = {m.x};
        shared.to_axes = {testing::numbered_alphabet("V1", 2),
                          testing::numbered_alphabet("V2", 2)};
        shared.kernel = {0.5, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.5};
        j = compose(j, shared);
        j = compose(j, Channel::constant({m.x1}, "U1"));
        j = compose(j, Channel::constant({m.x2}, "U2"));
        j = compose(j, Channel::constant({m.x}, "Q"));
        CHECK_THROWS_AS(eval_outer_lossless(j), ConsistencyError);
    }
    SUBCASE("missing axes are reported") {
        CHECK_THROWS_WITH_AS(eval_outer_lossless(build_joint(m)),
                             doctest::Contains("missing axis"), InvalidInput);
    }
}

TEST_CASE("corner points") {
    SUBCASE("storage pairs sum to the joint bound for plain systems") {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const SourceModel m = testing::random_binary_invertible_model(seed + 40);
            const AuxSystem aux = testing::random_admissible_aux(m, seed, 1, true);
            const RateBounds inner = eval_inner_lossless(m, aux);
            const auto [c12, c21] = corner_points(m, aux);
            CHECK(c12.order == DecodeOrder::order_12);
            CHECK(c21.order == DecodeOrder::order_21);
            CHECK(c12.bounds.r_w1 + c12.bounds.r_w2 == Approx(inner.r_w_sum).epsilon(1e-9));
            CHECK(c21.bounds.r_w1 + c21.bounds.r_w2 == Approx(inner.r_w_sum).epsilon(1e-9));
            // Non-storage coordinates agree across the corners and the region.
            CHECK(c12.bounds.r_s == c21.bounds.r_s);
            CHECK(c12.bounds.r_l_dec == c21.bounds.r_l_dec);
            CHECK(c12.bounds.r_l_eve == c21.bounds.r_l_eve);
            CHECK(c12.bounds.r_w_sum == c21.bounds.r_w_sum);
            CHECK(c12.bounds.r_s == Approx(inner.r_s).epsilon(1e-12));
        }
    }
    SUBCASE("published example corners share the joint storage bound") {
        const SourceModel m = example();
        const auto [c12, c21] = corner_points(m, identity_aux(m));
        const double h12y = eval_lemma2(m).r_w_sum;  // H(X1, X2 | Y)
        CHECK(c12.bounds.r_w_sum == Approx(h12y).epsilon(1e-12));
        CHECK(c12.bounds.r_w1 + c12.bounds.r_w2 == Approx(h12y).epsilon(1e-9));
        CHECK(c21.bounds.r_w1 + c21.bounds.r_w2 == Approx(h12y).epsilon(1e-9));
    }
    SUBCASE("symmetric models mirror under index exchange") {
        SourceModel m = testing::random_binary_invertible_model(55);
        m.ch2.kernel = m.ch1.kernel;
        m.validate();
        const auto [c12, c21] = corner_points(m, identity_aux(m));
        CHECK(c12.bounds.r_w1 == Approx(c21.bounds.r_w2).epsilon(1e-12));
        CHECK(c12.bounds.r_w2 == Approx(c21.bounds.r_w1).epsilon(1e-12));
    }
    SUBCASE("constant auxiliaries put both corners at the origin") {
        SourceModel m = testing::random_binary_invertible_model(56);
        testing::make_const(m);
        const auto [c12, c21] = corner_points(m, constant_aux(m));
        CHECK(c12.bounds.r_w1 == Approx(0.0).epsilon(1e-12));
        CHECK(c12.bounds.r_w2 == Approx(0.0).epsilon(1e-12));
        CHECK(c21.bounds.r_w1 == Approx(0.0).epsilon(1e-12));
        CHECK(c21.bounds.r_w2 == Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("lemma 1 specializations") {
    SUBCASE("projection target with a collapsed partner variable") {
        SourceModel m = testing::random_binary_invertible_model(61);
        testing::make_project1(m);
        AuxSystem aux = identity_aux(m);
        aux.branches[0].u2 =
            Channel::deterministic({m.x2}, aux.branches[0].u2.to_axes[0], {0, 0});
        aux.validate(m);
        const RateBounds b = eval_lemma1(m, aux);
        const JointDist j = build_joint(m);
        CHECK(b.origin == BoundOrigin::lemma1);
        CHECK(b.r_l_dec == Approx(oracle_cmi(j, {"X1"}, {"X"}, {"Y"})).epsilon(1e-9));
        // With U2 constant the first storage bound is the plain conditional
        // entropy of the first measurement at the fusion center.
        const double h1y = oracle_entropy(j, {"X1", "Y"}) - oracle_entropy(j, {"Y"});
        CHECK(b.r_w1 == Approx(h1y).epsilon(1e-9));
    }
    SUBCASE("noiseless first measurement with an identity partner") {
        SourceModel m = testing::random_binary_invertible_model(62);
        m.ch1 = Channel::identity(m.x, "X1");
        m.validate();
        const RateBounds b = eval_lemma1(m, identity_aux(m));
        const JointDist j = build_joint(m);
        const double want = oracle_entropy(j, {"X", "Y"}) - oracle_entropy(j, {"Y"}) -
                            oracle_cmi(j, {"X"}, {"X2"}, {"Y"});
        CHECK(b.r_w1 == Approx(want).epsilon(1e-9));
    }
    SUBCASE("v1 channel must be defined on the measurement alphabet") {
        SourceModel m = testing::random_binary_invertible_model(63);
        AuxSystem aux = testing::random_admissible_aux(m, 1, 1);
        // |U1| = 4 there, so the supplied V1 channel cannot be re-anchored.
        CHECK_THROWS_WITH_AS(eval_lemma1(m, aux), doctest::Contains("v1-channel"),
                             InvalidInput);
    }
}

TEST_CASE("lemma 2 time sharing and lemma 3 collapses") {
    SUBCASE("searched time-sharing channel never hurts the secrecy bound") {
        for (std::uint64_t seed : {71ULL, 72ULL, 73ULL}) {
            const SourceModel m = testing::random_binary_invertible_model(seed);
            const Channel q = best_lemma2_q(m);
            const RateBounds with_q = eval_lemma2(m, q);
            const RateBounds plain = eval_lemma2(m);
            CHECK(with_q.r_s <= plain.r_s + 1e-12);
            // Storage and fusion-center privacy do not involve the bracket.
            CHECK(with_q.r_w1 == Approx(plain.r_w1).epsilon(1e-12));
            CHECK(with_q.r_w2 == Approx(plain.r_w2).epsilon(1e-12));
            CHECK(with_q.r_w_sum == Approx(plain.r_w_sum).epsilon(1e-12));
            CHECK(with_q.r_l_dec == Approx(plain.r_l_dec).epsilon(1e-12));
        }
    }
    SUBCASE("time-sharing search is deterministic") {
        const SourceModel m = testing::random_binary_invertible_model(74);
        const Channel a = best_lemma2_q(m);
        const Channel b = best_lemma2_q(m);
        CHECK(a.kernel == b.kernel);
        CHECK(a.to_axes[0].symbols == b.to_axes[0].symbols);
    }
    SUBCASE("explicit binary labelings are accepted") {
        const SourceModel m = testing::random_binary_invertible_model(75);
        const Channel label = Channel::deterministic(
            {m.x1, m.x2}, testing::numbered_alphabet("Q", 2), {0, 1, 1, 0});
        const RateBounds b = eval_lemma2(m, label);
        CHECK(b.origin == BoundOrigin::lemma2);
        CHECK(b.r_s >= 0.0);
    }
    SUBCASE("independent eavesdropper maximizes the bracket") {
        const SourceModel m = independent_eve_model(76);
        const JointDist j = build_joint(m);
        const RateBounds b = eval_lemma2(m);
        const double h12_given_y =
            oracle_entropy(j, {"X1", "X2", "Y"}) - oracle_entropy(j, {"Y"});
        CHECK(b.r_s == Approx(h12_given_y).epsilon(1e-9));
        // Such a model is degraded toward the fusion center as well.
        check_close(eval_lemma3(m), b, 1e-12);
    }
    SUBCASE("identical observations equate the two privacy leakages") {
        SourceModel m = testing::random_binary_invertible_model(77);
        std::vector<double> k(8, 0.0);
        std::mt19937_64 rng(2);
        for (int xv = 0; xv < 2; ++xv) {
            const auto row = testing::random_pmf(rng, 2);
            for (int yv = 0; yv < 2; ++yv) {
                k[static_cast<std::size_t>(xv * 4 + yv * 2 + yv)] =
                    row[static_cast<std::size_t>(yv)];
            }
        }
        m.ch_yz = Channel{{m.x}, {m.y, m.z}, std::move(k)};
        m.validate();
        const RateBounds b = eval_lemma3(m);
        CHECK(b.r_l_eve == Approx(b.r_l_dec).epsilon(1e-12));
        CHECK(b.r_s == Approx(b.r_w_sum).epsilon(1e-12));  // both are H(X1,X2|Y)
    }
}

TEST_CASE("lossy bounds and reconstruction maps") {
    SUBCASE("identity auxiliaries reach zero distortion exactly") {
        SourceModel m = example();
        add_hamming_distortion(m);
        const RateBounds b = eval_inner_lossy(m, identity_aux(m));
        CHECK(b.origin == BoundOrigin::thm2_inner);
        REQUIRE(b.d.has_value());
        CHECK(*b.d == 0.0);
        // Rate fields match the lossless evaluation of the same system.
        check_close(b, eval_inner_lossless(m, identity_aux(m)), 1e-12);
    }
    SUBCASE("constant auxiliaries yield the per-observation MAP distortion") {
        SourceModel m = testing::random_binary_invertible_model(81);
        add_hamming_distortion(m);
        const RateBounds b = eval_inner_lossy(m, constant_aux(m));
        const JointDist j = with_function_axis(m, build_joint(m));
        double best_mass = 0.0;
        const auto fy = testing::tally(j, {"F", "Y"});
        for (int yv = 0; yv < 2; ++yv) {
            double top = 0.0;
            for (int fv = 0; fv < m.f.size(); ++fv) {
                const auto it = fy.find({fv, yv});
                if (it != fy.end() && it->second > top) top = it->second;
            }
            best_mass += top;
        }
        REQUIRE(b.d.has_value());
        CHECK(*b.d == Approx(1.0 - best_mass).epsilon(1e-9));
    }
    SUBCASE("an explicit constant map gives the plain expectation") {
        SourceModel m = testing::random_binary_invertible_model(82);
        add_hamming_distortion(m);
        const JointDist j = with_function_axis(m, build_joint(m));
        for (int fixed = 0; fixed < 2; ++fixed) {
            const ReconstructionMap g(2, fixed);  // |U1| = |U2| = 1, |Y| = 2
            const RateBounds b = eval_inner_lossy(m, constant_aux(m), g);
            double hit = 0.0;
            for (const auto& [key, mass] : testing::tally(j, {"F"})) {
                if (key[0] == fixed) hit += mass;
            }
            REQUIRE(b.d.has_value());
            CHECK(*b.d == Approx(1.0 - hit).epsilon(1e-9));
        }
    }
    SUBCASE("optimal reconstruction beats every exhaustively enumerated map") {
        SourceModel m = testing::random_binary_invertible_model(83);
        add_hamming_distortion(m);
        const AuxSystem aux = constant_aux(m);  // 2 cells, 4 labels -> 16 maps
        const ReconstructionMap best = optimal_reconstruction(m, aux);
        const double lib = *eval_inner_lossy(m, aux, best).d;
        CHECK(lib == Approx(*eval_inner_lossy(m, aux).d).epsilon(1e-12));
        double brute = 1e9;
        for (int a = 0; a < 4; ++a) {
            for (int b2 = 0; b2 < 4; ++b2) {
                const double d = *eval_inner_lossy(m, aux, ReconstructionMap{a, b2}).d;
                if (d < brute) brute = d;
            }
        }
        CHECK(lib == Approx(brute).epsilon(1e-12));
    }
    SUBCASE("map validation") {
        SourceModel m = testing::random_binary_invertible_model(84);
        CHECK_THROWS_WITH_AS(eval_inner_lossy(m, identity_aux(m)),
                             doctest::Contains("distortion"), PreconditionError);
        add_hamming_distortion(m);
        CHECK_THROWS_AS(eval_inner_lossy(m, identity_aux(m), ReconstructionMap{0}),
                        InvalidInput);
        ReconstructionMap bad(8, 0);
        bad[3] = 9;
        CHECK_THROWS_AS(eval_inner_lossy(m, identity_aux(m), bad), InvalidInput);
        CHECK_THROWS_AS(optimal_reconstruction(
                            testing::random_binary_invertible_model(85), identity_aux(m)),
                        PreconditionError);
    }
}

TEST_CASE("bounds are invariant under symbol relabeling") {
    const SourceModel base = testing::random_binary_invertible_model(91);
    const RateBounds want = eval_lemma2(base);

    SUBCASE("eavesdropper symbols") {
        SourceModel m = base;
        m.z = {"Z", {"1", "0"}};
        std::vector<double> k = m.ch_yz.kernel;
        for (int xv = 0; xv < 2; ++xv) {
            for (int yv = 0; yv < 2; ++yv) {
                std::swap(k[static_cast<std::size_t>(xv * 4 + yv * 2)],
                          k[static_cast<std::size_t>(xv * 4 + yv * 2 + 1)]);
            }
        }
        m.ch_yz = Channel{{m.x}, {m.y, m.z}, std::move(k)};
        m.validate();
        check_close(eval_lemma2(m), want, 1e-12);
        CHECK(check_degradedness(m).eve_degraded == check_degradedness(base).eve_degraded);
    }
    SUBCASE("second measurement symbols") {
        SourceModel m = base;
        m.x2 = {"X2", {"1", "0"}};
        std::vector<double> k = m.ch2.kernel;
        std::swap(k[0], k[1]);
        std::swap(k[2], k[3]);
        m.ch2 = Channel{{m.x}, {m.x2}, std::move(k)};
        std::vector<int> table(8);
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                for (int yv = 0; yv < 2; ++yv) {
                    table[static_cast<std::size_t>((a * 2 + b) * 2 + yv)] =
                        base.f_table[static_cast<std::size_t>((a * 2 + (1 - b)) * 2 + yv)];
                }
            }
        }
        m.f_table = table;
        m.validate();
        check_close(eval_lemma2(m), want, 1e-12);
        CHECK(classify_function(m) == FunctionClass::invertible);
    }
    SUBCASE("function labels") {
        SourceModel m = base;
        // Swap the first two function labels and remap the table.
        std::swap(m.f.symbols[0], m.f.symbols[1]);
        for (int& v : m.f_table) {
            if (v == 0) v = 1;
            else if (v == 1) v = 0;
        }
        m.validate();
        check_close(eval_lemma2(m), want, 1e-12);
        CHECK(classify_function(m) == FunctionClass::invertible);
    }
}
