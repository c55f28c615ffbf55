#pragma once

// Serialization: JSON model/auxiliary files and CSV/JSON result emission.
// All formats carry schema_version 1.

#include <cstdint>
#include <string>
#include <vector>

#include "fcomp/aux_search.hpp"
#include "fcomp/binning.hpp"
#include "fcomp/model.hpp"
#include "fcomp/regions.hpp"

namespace fcomp {

// JSON text -> model; `context` prefixes diagnostics (usually the file name).
SourceModel parse_model(const std::string& text, const std::string& context = "model");
SourceModel load_model(const std::string& path);
std::string model_to_json(const SourceModel& model);
void save_model(const SourceModel& model, const std::string& path);

AuxSystem parse_aux(const std::string& text, const SourceModel& model,
                    const std::string& context = "aux");
AuxSystem load_aux(const std::string& path, const SourceModel& model);
std::string aux_to_json(const AuxSystem& aux);

// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

// CSV: a "# schema_version=1" comment line, then a mandatory header.
std::string csv_preamble();
std::string bounds_csv_header();  // origin,r_s,r_w1,r_w2,r_w_sum,r_l_dec,r_l_eve,d
std::string bounds_csv_row(const RateBounds& b);
std::string front_csv_header();   // bounds columns + fingerprint
std::string front_csv_row(const ParetoPoint& p);
std::string sim_csv_header();
std::string sim_csv_row(const SimReport& rep, std::uint64_t seed, const BinRates& rates);

// Complete JSON documents: {"schema_version": 1, "rows": [...]}.
std::string bounds_json_doc(const std::vector<RateBounds>& rows);
std::string front_json_doc(const ParetoFront& front);
std::string sim_json_doc(const std::vector<SimReport>& rows,
                         const std::vector<std::uint64_t>& seeds, const BinRates& rates);

} // namespace fcomp
