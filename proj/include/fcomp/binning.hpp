#pragma once

// Finite-blocklength operational check: seeded random bin assignments over
// sequence spaces, successive MAP decoding, and exact or Monte Carlo
// measurement of reliability, secrecy, privacy, and storage.

#include <cstdint>
#include <optional>
#include <vector>

#include "fcomp/model.hpp"

namespace fcomp {

struct LayerRates {
    double f_rate = 0.0;  // shared-index rate (public helper layer)
    double w_rate = 0.0;  // stored-index rate
};

// One (F-rate, W-rate) pair per auxiliary layer.  Invertible-mode runs
// collapse each transmitter's v+u pair into a single map over measurement
// sequences.
struct BinRates {
    LayerRates v1, v2, u1, u2;
};

// Bin maps for one layer: every sequence rank gets an F-index and a W-index.
struct BinLayer {
    std::uint64_t seq_count = 1;
    std::uint64_t f_bins = 1;
    std::uint64_t w_bins = 1;
    std::vector<std::uint32_t> f_of;  // [sequence rank] -> F-index
    std::vector<std::uint32_t> w_of;  // [sequence rank] -> W-index
};

struct BinAssignment {
    int n = 1;
    bool aux_mode = false;
    // aux mode: all four layers are live; invertible mode: u1/u2 carry the
    // collapsed per-transmitter maps and v1/v2 stay trivial.
    BinLayer v1, v2, u1, u2;
};

struct SimReport {
    enum class Mode { exact, monte_carlo };
    int n = 1;
    Mode mode = Mode::exact;
    double error_prob = 0.0;
    // Exact mode only; Monte Carlo runs report these absent.
    std::optional<double> secrecy_leak;  // (1/n) I(X1^n,X2^n,Y^n; W | Z^n)
    std::optional<double> priv_dec;      // (1/n) I(X^n; W | Y^n)
    std::optional<double> priv_eve;      // (1/n) I(X^n; W | Z^n)
    double storage1 = 0.0;  // (1/n) log2 of transmitter 1's W index space
    double storage2 = 0.0;
    std::optional<double> confidence;  // Wilson 95% radius (Monte Carlo)
};

// The per-layer rate assignments computed from single-letter quantities on
// the induced joint; invertible mode (aux == nullptr) returns the collapsed
// successive-decoding corner (H(X1|Y) + 4e, H(X2|X1,Y) + 4e) with zero
// F-rates.
BinRates default_rates(const SourceModel& model, const AuxSystem* aux, double epsilon);

// Seed-reproducible maps; requested bin counts are 2^ceil(n * rate), capped
// (with a warning on stderr) at an injective draw when they exceed the
// sequence space.
BinAssignment make_binning(int n, const BinRates& rates, const SourceModel& model,
                           const AuxSystem* aux, std::uint64_t seed);

// Exhaustive evaluation of the invertible-mode scheme: exact block error of
// the MAP decoder and exact leakages from the enumerated joint.
SimReport simulate_exact(const SourceModel& model, int n, const BinRates& rates,
                         std::uint64_t seed);

// Sampled evaluation; aux == nullptr runs invertible mode, otherwise the
// 4-step successive decoder over (V1, V2, U1, U2).  Leakages are not
// estimated.
SimReport simulate_mc(const SourceModel& model, int n, const BinRates& rates,
                      std::uint64_t seed, std::uint64_t trials,
                      const AuxSystem* aux = nullptr);

} // namespace fcomp
