#include "fcomp/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "fcomp/errors.hpp"

namespace fcomp {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& context, const std::string& msg) {
    throw InvalidInput(context + ": " + msg);
}

void check_schema_version(const json& j, const std::string& context) {
    if (!j.is_object()) fail(context, "top-level value must be an object");
    if (!j.contains("schema_version")) fail(context, "missing schema_version");
    if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != 1) {
        fail(context, "unsupported schema_version (expected 1)");
    }
}

Alphabet read_alphabet(const json& alphabets, const std::string& name,
                       const std::string& context) {
    if (!alphabets.contains(name)) fail(context, "alphabets is missing '" + name + "'");
    const json& arr = alphabets[name];
    if (!arr.is_array() || arr.empty()) {
        fail(context, "alphabet '" + name + "' must be a non-empty array of labels");
    }
    Alphabet a{name, {}};
    for (const json& s : arr) {
        if (!s.is_string()) fail(context, "alphabet '" + name + "' has a non-string label");
        a.symbols.push_back(s.get<std::string>());
    }
    for (std::size_t i = 0; i < a.symbols.size(); ++i) {
        for (std::size_t k = i + 1; k < a.symbols.size(); ++k) {
            if (a.symbols[i] == a.symbols[k]) {
                fail(context, "alphabet '" + name + "' repeats label '" + a.symbols[i] + "'");
            }
        }
    }
    return a;
}

std::vector<double> read_vector(const json& arr, std::size_t want, const std::string& what,
                                const std::string& context) {
    if (!arr.is_array() || arr.size() != want) {
        fail(context, what + " must be an array of " + std::to_string(want) + " numbers");
    }
    std::vector<double> out;
    out.reserve(want);
    for (const json& v : arr) {
        if (!v.is_number()) fail(context, what + " has a non-numeric entry");
        out.push_back(v.get<double>());
    }
    return out;
}

// Nested [rows][cols] matrix flattened row-major.
std::vector<double> read_matrix(const json& arr, std::size_t rows, std::size_t cols,
                                const std::string& what, const std::string& context) {
    if (!arr.is_array() || arr.size() != rows) {
        fail(context, what + " must have " + std::to_string(rows) + " rows");
    }
    std::vector<double> out;
    out.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::vector<double> row =
            read_vector(arr[r], cols, what + " row " + std::to_string(r), context);
        out.insert(out.end(), row.begin(), row.end());
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write '" + path + "'");
    out << text;
    if (!out) throw InvalidInput("write to '" + path + "' failed");
}

json matrix_json(const std::vector<double>& flat, std::size_t rows, std::size_t cols) {
    json out = json::array();
    for (std::size_t r = 0; r < rows; ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < cols; ++c) row.push_back(flat[r * cols + c]);
        out.push_back(std::move(row));
    }
    return out;
}

std::string csv_cell(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

json optional_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

const char* mode_name(SimReport::Mode m) {
    return m == SimReport::Mode::exact ? "exact" : "monte_carlo";
}

json sim_row_json(const SimReport& rep, std::uint64_t seed, const BinRates& rates) {
    json row;
    row["n"] = rep.n;
    row["seed"] = seed;
    row["mode"] = mode_name(rep.mode);
    row["f_rate1"] = rates.v1.f_rate + rates.u1.f_rate;
    row["w_rate1"] = rates.v1.w_rate + rates.u1.w_rate;
    row["f_rate2"] = rates.v2.f_rate + rates.u2.f_rate;
    row["w_rate2"] = rates.v2.w_rate + rates.u2.w_rate;
    row["error_prob"] = rep.error_prob;
    row["confidence"] = optional_json(rep.confidence);
    row["secrecy_leak"] = optional_json(rep.secrecy_leak);
    row["priv_dec"] = optional_json(rep.priv_dec);
    row["priv_eve"] = optional_json(rep.priv_eve);
    row["storage1"] = rep.storage1;
    row["storage2"] = rep.storage2;
    return row;
}

json bounds_row_json(const RateBounds& b) {
    json row;
    row["origin"] = to_string(b.origin);
    row["r_s"] = b.r_s;
    row["r_w1"] = b.r_w1;
    row["r_w2"] = b.r_w2;
    row["r_w_sum"] = b.r_w_sum;
    row["r_l_dec"] = b.r_l_dec;
    row["r_l_eve"] = b.r_l_eve;
    row["d"] = optional_json(b.d);
    return row;
}

} // namespace

SourceModel parse_model(const std::string& text, const std::string& context) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(context, e.what());
    }
    check_schema_version(j, context);
    if (!j.contains("alphabets")) fail(context, "missing alphabets");

    SourceModel m;
    const json& alphabets = j["alphabets"];
    m.x = read_alphabet(alphabets, "X", context);
    m.x1 = read_alphabet(alphabets, "X1", context);
    m.x2 = read_alphabet(alphabets, "X2", context);
    m.y = read_alphabet(alphabets, "Y", context);
    m.z = read_alphabet(alphabets, "Z", context);
    m.f = read_alphabet(alphabets, "F", context);
    for (const auto& item : alphabets.items()) {
        const std::string& k = item.key();
        if (k != "X" && k != "X1" && k != "X2" && k != "Y" && k != "Z" && k != "F") {
            fail(context, "unknown alphabet '" + k + "'");
        }
    }

    const std::size_t nx = static_cast<std::size_t>(m.x.size());
    const std::size_t n1 = static_cast<std::size_t>(m.x1.size());
    const std::size_t n2 = static_cast<std::size_t>(m.x2.size());
    const std::size_t ny = static_cast<std::size_t>(m.y.size());
    const std::size_t nz = static_cast<std::size_t>(m.z.size());

    if (!j.contains("p_x")) fail(context, "missing p_x");
    m.p_x = read_vector(j["p_x"], nx, "p_x", context);

    if (!j.contains("ch1")) fail(context, "missing ch1");
    m.ch1 = Channel{{m.x}, {m.x1}, read_matrix(j["ch1"], nx, n1, "ch1", context)};
    if (!j.contains("ch2")) fail(context, "missing ch2");
    m.ch2 = Channel{{m.x}, {m.x2}, read_matrix(j["ch2"], nx, n2, "ch2", context)};

    if (!j.contains("ch_yz")) fail(context, "missing ch_yz");
    const json& chyz = j["ch_yz"];
    if (!chyz.is_array() || chyz.size() != nx) {
        fail(context, "ch_yz must have one [y][z] block per source symbol");
    }
    std::vector<double> yz;
    yz.reserve(nx * ny * nz);
    for (std::size_t xv = 0; xv < nx; ++xv) {
        const std::vector<double> block = read_matrix(
            chyz[xv], ny, nz, "ch_yz block " + std::to_string(xv), context);
        yz.insert(yz.end(), block.begin(), block.end());
    }
    m.ch_yz = Channel{{m.x}, {m.y, m.z}, std::move(yz)};

    if (!j.contains("f")) fail(context, "missing f");
    const json& ftab = j["f"];
    if (!ftab.is_array() || ftab.size() != n1) {
        fail(context, "f must have one [x2][y] block per first-measurement symbol");
    }
    m.f_table.reserve(n1 * n2 * ny);
    for (std::size_t a = 0; a < n1; ++a) {
        if (!ftab[a].is_array() || ftab[a].size() != n2) {
            fail(context, "f block " + std::to_string(a) + " must have " +
                              std::to_string(n2) + " rows");
        }
        for (std::size_t b = 0; b < n2; ++b) {
            const json& row = ftab[a][b];
            if (!row.is_array() || row.size() != ny) {
                fail(context, "f entry [" + std::to_string(a) + "][" + std::to_string(b) +
                                  "] must list " + std::to_string(ny) + " labels");
            }
            for (std::size_t yv = 0; yv < ny; ++yv) {
                if (!row[yv].is_string()) {
                    fail(context, "f entries must be labels from the F alphabet");
                }
                const std::string label = row[yv].get<std::string>();
                int idx = -1;
                for (std::size_t k = 0; k < m.f.symbols.size(); ++k) {
                    if (m.f.symbols[k] == label) {
                        idx = static_cast<int>(k);
                        break;
                    }
                }
                if (idx < 0) {
                    fail(context, "f entry [" + std::to_string(a) + "][" + std::to_string(b) +
                                      "][" + std::to_string(yv) + "] uses undeclared label '" +
                                      label + "'");
                }
                m.f_table.push_back(idx);
            }
        }
    }

    if (j.contains("distortion")) {
        const json& dj = j["distortion"];
        if (!dj.is_object()) fail(context, "distortion must be an object");
        if (!dj.contains("f_hat_alphabet")) {
            fail(context, "distortion is missing f_hat_alphabet");
        }
        Distortion dist;
        const json wrapper = json{{"Fh", dj["f_hat_alphabet"]}};
        dist.f_hat = read_alphabet(wrapper, "Fh", context);
        if (!dj.contains("d")) fail(context, "distortion is missing d");
        dist.d = read_matrix(dj["d"], m.f.symbols.size(), dist.f_hat.symbols.size(),
                             "distortion d", context);
        m.distortion = std::move(dist);
    }

    try {
        m.validate();
    } catch (const Error& e) {
        fail(context, e.what());
    }
    return m;
}

SourceModel load_model(const std::string& path) {
    return parse_model(read_file(path), path);
}

std::string model_to_json(const SourceModel& model) {
    model.validate();
    json j;
    j["schema_version"] = 1;
    j["alphabets"] = {{"X", model.x.symbols},   {"X1", model.x1.symbols},
                      {"X2", model.x2.symbols}, {"Y", model.y.symbols},
                      {"Z", model.z.symbols},   {"F", model.f.symbols}};
    j["p_x"] = model.p_x;
    const std::size_t nx = static_cast<std::size_t>(model.x.size());
    const std::size_t n1 = static_cast<std::size_t>(model.x1.size());
    const std::size_t n2 = static_cast<std::size_t>(model.x2.size());
    const std::size_t ny = static_cast<std::size_t>(model.y.size());
    const std::size_t nz = static_cast<std::size_t>(model.z.size());
    j["ch1"] = matrix_json(model.ch1.kernel, nx, n1);
    j["ch2"] = matrix_json(model.ch2.kernel, nx, n2);
    json chyz = json::array();
    for (std::size_t xv = 0; xv < nx; ++xv) {
        json block = json::array();
        for (std::size_t yv = 0; yv < ny; ++yv) {
            json row = json::array();
            for (std::size_t zv = 0; zv < nz; ++zv) {
                row.push_back(model.ch_yz.kernel[(xv * ny + yv) * nz + zv]);
            }
            block.push_back(std::move(row));
        }
        chyz.push_back(std::move(block));
    }
    j["ch_yz"] = std::move(chyz);
    json ftab = json::array();
    for (std::size_t a = 0; a < n1; ++a) {
        json block = json::array();
        for (std::size_t b = 0; b < n2; ++b) {
            json row = json::array();
            for (std::size_t yv = 0; yv < ny; ++yv) {
                row.push_back(model.f.symbols[static_cast<std::size_t>(
                    model.f_table[(a * n2 + b) * ny + yv])]);
            }
            block.push_back(std::move(row));
        }
        ftab.push_back(std::move(block));
    }
    j["f"] = std::move(ftab);
    if (model.distortion) {
        j["distortion"] = {
            {"f_hat_alphabet", model.distortion->f_hat.symbols},
            {"d", matrix_json(model.distortion->d, model.f.symbols.size(),
                              model.distortion->f_hat.symbols.size())}};
    }
    return j.dump(2) + "\n";
}

void save_model(const SourceModel& model, const std::string& path) {
    write_file(path, model_to_json(model));
}

AuxSystem parse_aux(const std::string& text, const SourceModel& model,
                    const std::string& context) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(context, e.what());
    }
    check_schema_version(j, context);
    if (!j.contains("alphabets")) fail(context, "missing alphabets");
    const json& alphabets = j["alphabets"];

    AuxSystem aux;
    aux.q = read_alphabet(alphabets, "Q", context);
    const Alphabet u1 = read_alphabet(alphabets, "U1", context);
    const Alphabet v1 = read_alphabet(alphabets, "V1", context);
    const Alphabet u2 = read_alphabet(alphabets, "U2", context);
    const Alphabet v2 = read_alphabet(alphabets, "V2", context);
    for (const auto& item : alphabets.items()) {
        const std::string& k = item.key();
        if (k != "Q" && k != "U1" && k != "V1" && k != "U2" && k != "V2") {
            fail(context, "unknown alphabet '" + k + "'");
        }
    }

    if (!j.contains("weights")) fail(context, "missing weights");
    aux.weights = read_vector(j["weights"], aux.q.symbols.size(), "weights", context);

    if (!j.contains("branches")) fail(context, "missing branches");
    const json& branches = j["branches"];
    if (!branches.is_array() || branches.size() != aux.q.symbols.size()) {
        fail(context, "branches must list one entry per time-sharing symbol");
    }
    for (std::size_t qi = 0; qi < branches.size(); ++qi) {
        const json& bj = branches[qi];
        if (!bj.is_object()) fail(context, "branch " + std::to_string(qi) + " must be an object");
        const std::string label = "branch " + std::to_string(qi) + " ";
        for (const char* key : {"u1", "v1", "u2", "v2"}) {
            if (!bj.contains(key)) fail(context, label + "is missing '" + key + "'");
        }
        AuxBranch br;
        br.u1 = Channel{{model.x1},
                        {u1},
                        read_matrix(bj["u1"], static_cast<std::size_t>(model.x1.size()),
                                    u1.symbols.size(), label + "u1", context)};
        br.v1 = Channel{{u1},
                        {v1},
                        read_matrix(bj["v1"], u1.symbols.size(), v1.symbols.size(),
                                    label + "v1", context)};
        br.u2 = Channel{{model.x2},
                        {u2},
                        read_matrix(bj["u2"], static_cast<std::size_t>(model.x2.size()),
                                    u2.symbols.size(), label + "u2", context)};
        br.v2 = Channel{{u2},
                        {v2},
                        read_matrix(bj["v2"], u2.symbols.size(), v2.symbols.size(),
                                    label + "v2", context)};
        aux.branches.push_back(std::move(br));
    }

    try {
        aux.validate(model);
    } catch (const Error& e) {
        fail(context, e.what());
    }
    return aux;
}

AuxSystem load_aux(const std::string& path, const SourceModel& model) {
    return parse_aux(read_file(path), model, path);
}

std::string aux_to_json(const AuxSystem& aux) {
    json j;
    j["schema_version"] = 1;
    const AuxBranch& first = aux.branches.front();
    j["alphabets"] = {{"Q", aux.q.symbols},
                      {"U1", first.u1.to_axes[0].symbols},
                      {"V1", first.v1.to_axes[0].symbols},
                      {"U2", first.u2.to_axes[0].symbols},
                      {"V2", first.v2.to_axes[0].symbols}};
    j["weights"] = aux.weights;
    json branches = json::array();
    for (const AuxBranch& br : aux.branches) {
        json bj;
        bj["u1"] = matrix_json(br.u1.kernel, br.u1.from_cells(), br.u1.to_cells());
        bj["v1"] = matrix_json(br.v1.kernel, br.v1.from_cells(), br.v1.to_cells());
        bj["u2"] = matrix_json(br.u2.kernel, br.u2.from_cells(), br.u2.to_cells());
        bj["v2"] = matrix_json(br.v2.kernel, br.v2.from_cells(), br.v2.to_cells());
        branches.push_back(std::move(bj));
    }
    j["branches"] = std::move(branches);
    return j.dump(2) + "\n";
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // Trim to the shortest representation that round-trips.
    for (int prec = 1; prec < 17; ++prec) {
        char probe[40];
        std::snprintf(probe, sizeof probe, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(probe, "%lf", &back);
        if (back == v) return probe;
    }
    return buf;
}

std::string csv_preamble() { return "# schema_version=1\n"; }

std::string bounds_csv_header() {
    return "origin,r_s,r_w1,r_w2,r_w_sum,r_l_dec,r_l_eve,d";
}

std::string bounds_csv_row(const RateBounds& b) {
    std::ostringstream row;
    row << to_string(b.origin) << ',' << format_double(b.r_s) << ',' << format_double(b.r_w1)
        << ',' << format_double(b.r_w2) << ',' << format_double(b.r_w_sum) << ','
        << format_double(b.r_l_dec) << ',' << format_double(b.r_l_eve) << ','
        << csv_cell(b.d);
    return row.str();
}

std::string front_csv_header() { return bounds_csv_header() + ",fingerprint"; }

std::string front_csv_row(const ParetoPoint& p) {
    return bounds_csv_row(p.bounds) + "," + p.fingerprint;
}

std::string sim_csv_header() {
    return "n,seed,f_rate1,w_rate1,f_rate2,w_rate2,mode,error_prob,confidence,"
           "secrecy_leak,priv_dec,priv_eve,storage1,storage2";
}

std::string sim_csv_row(const SimReport& rep, std::uint64_t seed, const BinRates& rates) {
    std::ostringstream row;
    row << rep.n << ',' << seed << ',' << format_double(rates.v1.f_rate + rates.u1.f_rate)
        << ',' << format_double(rates.v1.w_rate + rates.u1.w_rate) << ','
        << format_double(rates.v2.f_rate + rates.u2.f_rate) << ','
        << format_double(rates.v2.w_rate + rates.u2.w_rate) << ',' << mode_name(rep.mode)
        << ',' << format_double(rep.error_prob) << ',' << csv_cell(rep.confidence) << ','
        << csv_cell(rep.secrecy_leak) << ',' << csv_cell(rep.priv_dec) << ','
        << csv_cell(rep.priv_eve) << ',' << format_double(rep.storage1) << ','
        << format_double(rep.storage2);
    return row.str();
}

std::string bounds_json_doc(const std::vector<RateBounds>& rows) {
    json j;
    j["schema_version"] = 1;
    json arr = json::array();
    for (const RateBounds& b : rows) arr.push_back(bounds_row_json(b));
    j["rows"] = std::move(arr);
    return j.dump(2) + "\n";
}

std::string front_json_doc(const ParetoFront& front) {
    json j;
    j["schema_version"] = 1;
    json arr = json::array();
    for (const ParetoPoint& p : front) {
        json row = bounds_row_json(p.bounds);
        row["fingerprint"] = p.fingerprint;
        arr.push_back(std::move(row));
    }
    j["rows"] = std::move(arr);
    return j.dump(2) + "\n";
}

std::string sim_json_doc(const std::vector<SimReport>& rows,
                         const std::vector<std::uint64_t>& seeds, const BinRates& rates) {
    if (rows.size() != seeds.size()) {
        throw InvalidInput("simulation rows and seeds differ in length");
    }
    json j;
    j["schema_version"] = 1;
    json arr = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        arr.push_back(sim_row_json(rows[i], seeds[i], rates));
    }
    j["rows"] = std::move(arr);
    return j.dump(2) + "\n";
}

} // namespace fcomp
