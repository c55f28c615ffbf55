// Command-line front end: model ingestion plus the classify / evaluate /
// search / simulate subcommands, all emitting versioned CSV or JSON.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fcomp/aux_search.hpp"
#include "fcomp/binning.hpp"
#include "fcomp/errors.hpp"
#include "fcomp/model.hpp"
#include "fcomp/model_io.hpp"
#include "fcomp/regions.hpp"

namespace {

using namespace fcomp;

struct CommonOpts {
    std::string model_path;
    std::vector<double> example;  // beta1 beta2 alpha q
    std::string output;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    CLI::Option* m =
        cmd->add_option("--model", o.model_path, "Model description file (JSON)");
    CLI::Option* e =
        cmd->add_option("--example-bernoulli", o.example,
                        "Builtin binary multiplicative-noise model: beta1 beta2 alpha q")
            ->expected(4);
    m->excludes(e);
    e->excludes(m);
    cmd->add_option("-o,--output", o.output, "Write the result to this file (default: stdout)");
    cmd->add_option("--format", o.format, "Output format (default: csv)")
        ->check(CLI::IsMember({"csv", "json"}));
}

SourceModel resolve_model(const CommonOpts& o) {
    if (!o.model_path.empty()) return load_model(o.model_path);
    if (o.example.size() == 4) {
        return bernoulli_example_model(o.example[0], o.example[1], o.example[2],
                                       o.example[3]);
    }
    throw InvalidInput("no model given: use --model FILE or --example-bernoulli b1 b2 alpha q");
}

AuxSystem resolve_aux(const std::string& spec, const SourceModel& model) {
    if (spec.empty() || spec == "identity") return identity_aux(model);
    if (spec == "constant") return constant_aux(model);
    return load_aux(spec, model);
}

void emit(const CommonOpts& o, const std::string& text) {
    if (o.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(o.output, std::ios::binary);
    if (!out) throw InvalidInput("cannot write '" + o.output + "'");
    out << text;
    if (!out) throw InvalidInput("write to '" + o.output + "' failed");
}

void emit_bounds(const CommonOpts& o, const std::vector<RateBounds>& rows) {
    if (o.format == "json") {
        emit(o, bounds_json_doc(rows));
        return;
    }
    std::ostringstream text;
    text << csv_preamble() << bounds_csv_header() << '\n';
    for (const RateBounds& b : rows) text << bounds_csv_row(b) << '\n';
    emit(o, text.str());
}

// ---------------------------------------------------------------- classify

int run_classify(const CommonOpts& o) {
    const SourceModel model = resolve_model(o);
    const FunctionClass cls = classify_function(model);
    const DegradednessReport deg = check_degradedness(model);

    std::vector<int> lemmas;
    const bool invertible = cls == FunctionClass::invertible;
    if (invertible || cls == FunctionClass::partially_invertible_wrt_1) lemmas.push_back(1);
    if (invertible) lemmas.push_back(2);
    if (invertible && deg.eve_degraded) lemmas.push_back(3);
    if (invertible && deg.fusion_degraded) lemmas.push_back(4);

    if (o.format == "json") {
        nlohmann::json j;
        j["schema_version"] = 1;
        j["function_class"] = to_string(cls);
        j["eve_degraded"] = deg.eve_degraded;
        j["fusion_degraded"] = deg.fusion_degraded;
        j["residual_eve"] = deg.residual_eve;
        j["residual_fusion"] = deg.residual_fusion;
        j["applicable_lemmas"] = lemmas;
        emit(o, j.dump(2) + "\n");
        return 0;
    }
    std::ostringstream text;
    text << csv_preamble() << "key,value\n";
    text << "function_class," << to_string(cls) << '\n';
    text << "eve_degraded," << (deg.eve_degraded ? "true" : "false") << '\n';
    text << "fusion_degraded," << (deg.fusion_degraded ? "true" : "false") << '\n';
    text << "residual_eve," << format_double(deg.residual_eve) << '\n';
    text << "residual_fusion," << format_double(deg.residual_fusion) << '\n';
    text << "applicable_lemmas,";
    for (std::size_t i = 0; i < lemmas.size(); ++i) text << (i ? " " : "") << lemmas[i];
    text << '\n';
    emit(o, text.str());
    return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOpts {
    int lemma = 0;        // 1..4; 0 = not selected
    std::string theorem;  // 1-inner | 1-outer | 2-inner
    std::string aux = "identity";
    bool search_q = false;
    bool hamming = false;
};

int run_evaluate(const CommonOpts& o, const EvaluateOpts& e) {
    SourceModel model = resolve_model(o);
    if (e.hamming && !model.distortion) add_hamming_distortion(model);
    if (e.lemma == 0 && e.theorem.empty()) {
        throw InvalidInput("evaluate needs a selector: --lemma N or --theorem NAME");
    }

    std::vector<RateBounds> rows;
    if (e.lemma != 0) {
        switch (e.lemma) {
            case 1: rows.push_back(eval_lemma1(model, resolve_aux(e.aux, model))); break;
            case 2:
                rows.push_back(e.search_q ? eval_lemma2(model, best_lemma2_q(model))
                                          : eval_lemma2(model));
                break;
            case 3: rows.push_back(eval_lemma3(model)); break;
            default: rows.push_back(eval_lemma4(model)); break;
        }
    } else {
        const AuxSystem aux = resolve_aux(e.aux, model);
        if (e.theorem == "1-inner") {
            rows.push_back(eval_inner_lossless(model, aux));
        } else if (e.theorem == "1-outer") {
            rows.push_back(eval_outer_lossless(induced_joint(model, aux)));
        } else {
            rows.push_back(eval_inner_lossy(model, aux));
        }
    }
    emit_bounds(o, rows);
    return 0;
}

// ------------------------------------------------------------------ search

struct SearchOpts {
    SearchConfig cfg;
    std::string mode = "lossless";
    bool hamming = false;
};

int run_search(const CommonOpts& o, const SearchOpts& s) {
    SourceModel model = resolve_model(o);
    SearchConfig cfg = s.cfg;
    cfg.mode = s.mode == "lossy" ? SearchMode::lossy : SearchMode::lossless;
    if (cfg.mode == SearchMode::lossy && s.hamming && !model.distortion) {
        add_hamming_distortion(model);
    }
    const ParetoFront front = search_inner(model, cfg);
    if (o.format == "json") {
        emit(o, front_json_doc(front));
        return 0;
    }
    std::ostringstream text;
    text << csv_preamble() << front_csv_header() << '\n';
    for (const ParetoPoint& p : front) text << front_csv_row(p) << '\n';
    emit(o, text.str());
    return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    int n = 1;
    std::string mode = "exact";
    std::uint64_t seed = 0;
    std::uint64_t trials = 2000;
    double epsilon = 0.05;
    int seed_count = 10;
    double w_rate1 = 0.0;
    double w_rate2 = 0.0;
    std::string aux;  // non-empty selects the 4-layer scheme for mc runs
};

int run_simulate(const CommonOpts& o, const SimulateOpts& s, bool w1_set, bool w2_set) {
    const SourceModel model = resolve_model(o);
    if (s.seed_count < 1) throw InvalidInput("--seed-count must be at least 1");
    std::optional<AuxSystem> aux;
    if (!s.aux.empty()) aux = resolve_aux(s.aux, model);
    if (s.mode == "exact" && aux) {
        throw InvalidInput("exact mode always uses the measurement-sequence scheme; "
                           "--aux applies to --mode mc only");
    }

    BinRates rates = default_rates(model, aux ? &*aux : nullptr, s.epsilon);
    if (w1_set) rates.u1.w_rate = s.w_rate1;
    if (w2_set) rates.u2.w_rate = s.w_rate2;

    std::vector<SimReport> rows;
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < s.seed_count; ++i) {
        const std::uint64_t sd = s.seed + static_cast<std::uint64_t>(i);
        seeds.push_back(sd);
        if (s.mode == "exact") {
            rows.push_back(simulate_exact(model, s.n, rates, sd));
        } else {
            rows.push_back(simulate_mc(model, s.n, rates, sd, s.trials,
                                       aux ? &*aux : nullptr));
        }
    }

    if (o.format == "json") {
        emit(o, sim_json_doc(rows, seeds, rates));
        return 0;
    }
    std::ostringstream text;
    text << csv_preamble() << sim_csv_header() << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        text << sim_csv_row(rows[i], seeds[i], rates) << '\n';
    }
    emit(o, text.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Secure two-transmitter function computation: rate-region bounds, "
                 "auxiliary-variable search, and random-binning simulation"};
    app.require_subcommand(1);

    CommonOpts classify_common;
    CLI::App* classify_cmd = app.add_subcommand(
        "classify", "Report the function class, degradedness residuals, and which "
                    "specialized bounds apply");
    add_common(classify_cmd, classify_common);

    CommonOpts evaluate_common;
    EvaluateOpts evaluate_opts;
    CLI::App* evaluate_cmd =
        app.add_subcommand("evaluate", "Evaluate one bound set as a rate row");
    add_common(evaluate_cmd, evaluate_common);
    {
        CLI::Option* lem = evaluate_cmd
                               ->add_option("--lemma", evaluate_opts.lemma,
                                            "Specialized bound set (1-4)")
                               ->check(CLI::Range(1, 4));
        CLI::Option* thm =
            evaluate_cmd
                ->add_option("--theorem", evaluate_opts.theorem,
                             "General bound set: 1-inner, 1-outer, or 2-inner (lossy)")
                ->check(CLI::IsMember({"1-inner", "1-outer", "2-inner"}));
        lem->excludes(thm);
        thm->excludes(lem);
        evaluate_cmd->add_option(
            "--aux", evaluate_opts.aux,
            "Auxiliary system: a JSON file, 'identity', or 'constant' (default identity)");
        evaluate_cmd->add_flag("--search-q", evaluate_opts.search_q,
                               "With --lemma 2: pick the best binary time-sharing channel");
        evaluate_cmd->add_flag("--hamming", evaluate_opts.hamming,
                               "Attach the 0/1 distortion on the function alphabet when "
                               "the model declares none");
    }

    CommonOpts search_common;
    SearchOpts search_opts;
    CLI::App* search_cmd = app.add_subcommand(
        "search", "Random-restart descent over auxiliary systems; emits the Pareto front");
    add_common(search_cmd, search_common);
    {
        search_cmd->add_option("--seed", search_opts.cfg.seed, "Root seed")->required();
        search_cmd->add_option("--restarts", search_opts.cfg.restarts,
                               "Restart count (default 8)");
        search_cmd->add_option("--iterations", search_opts.cfg.iterations,
                               "Descent steps per restart (default 120)");
        search_cmd->add_option("--scale", search_opts.cfg.scale,
                               "Perturbation mix in (0,1] (default 0.25)");
        search_cmd->add_option("--penalty", search_opts.cfg.penalty,
                               "Admissibility penalty weight (default 4)");
        search_cmd->add_option("--weights", search_opts.cfg.weights,
                               "Scalarization weights: 6 values, or 7 in lossy mode");
        search_cmd->add_option("--card-u1", search_opts.cfg.card_u1, "|U1| (0 = default)");
        search_cmd->add_option("--card-u2", search_opts.cfg.card_u2, "|U2| (0 = default)");
        search_cmd->add_option("--card-v1", search_opts.cfg.card_v1, "|V1| (0 = default)");
        search_cmd->add_option("--card-v2", search_opts.cfg.card_v2, "|V2| (0 = default)");
        search_cmd->add_option("--card-q", search_opts.cfg.card_q, "|Q| (0 = default)");
        search_cmd->add_option("--mode", search_opts.mode, "lossless or lossy")
            ->check(CLI::IsMember({"lossless", "lossy"}));
        search_cmd->add_flag("--hamming", search_opts.hamming,
                             "Lossy mode: attach the 0/1 distortion when the model "
                             "declares none");
    }

    CommonOpts simulate_common;
    SimulateOpts simulate_opts;
    CLI::App* simulate_cmd = app.add_subcommand(
        "simulate", "Run the random-binning scheme at blocklength n, one row per seed");
    add_common(simulate_cmd, simulate_common);
    CLI::Option* w1_opt = nullptr;
    CLI::Option* w2_opt = nullptr;
    {
        simulate_cmd->add_option("--n", simulate_opts.n, "Blocklength")
            ->required()
            ->check(CLI::PositiveNumber);
        simulate_cmd->add_option("--mode", simulate_opts.mode,
                                 "exact or mc (default exact)")
            ->check(CLI::IsMember({"exact", "mc"}));
        simulate_cmd->add_option("--seed", simulate_opts.seed, "First binning seed")
            ->required();
        simulate_cmd->add_option("--seed-count", simulate_opts.seed_count,
                                 "Binning realizations to average over (default 10)");
        simulate_cmd->add_option("--trials", simulate_opts.trials,
                                 "Monte Carlo blocks per seed (default 2000)");
        simulate_cmd->add_option("--epsilon", simulate_opts.epsilon,
                                 "Rate slack for the default rates (default 0.05)");
        w1_opt = simulate_cmd->add_option("--w-rate1", simulate_opts.w_rate1,
                                          "Override the stored-index rate of transmitter 1");
        w2_opt = simulate_cmd->add_option("--w-rate2", simulate_opts.w_rate2,
                                          "Override the stored-index rate of transmitter 2");
        simulate_cmd->add_option("--aux", simulate_opts.aux,
                                 "mc mode: auxiliary system file, 'identity', or "
                                 "'constant' for the 4-layer scheme");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (classify_cmd->parsed()) return run_classify(classify_common);
        if (evaluate_cmd->parsed()) return run_evaluate(evaluate_common, evaluate_opts);
        if (search_cmd->parsed()) return run_search(search_common, search_opts);
        return run_simulate(simulate_common, simulate_opts, w1_opt->count() > 0,
                            w2_opt->count() > 0);
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ConsistencyError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}
