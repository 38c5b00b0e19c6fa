#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "admitml/table.hpp"

namespace admitml {

// Generator settings for the bundled graduate-admissions-schema dataset.
// Bias knobs shift group admission odds in logit space; `anomaly_count` rows
// are injected as label contradictions that the default CleaningRule matches
// exactly (strong profile labeled 0 / weak profile labeled 1).
struct SyntheticConfig {
    std::size_t rows = 400;
    std::size_t anomaly_count = 0;
    double gender_bias = 0.0;    // positive raises female admission odds
    double parental_bias = 0.0;  // positive raises high-parental-education odds
    double noise_sd = 0.8;       // sd of the logit noise term

    void validate() const;
};

// Columns: GRE (260-340), TOEFL (92-120), CGPA (0-10), SOP, LOR (1-5),
// Research (0/1), Gender, Parental_Education, Admit_Chance ([0,1], increasing
// in GRE/TOEFL/CGPA). Deterministic: same (config, seed) gives a
// byte-identical table.
DataTable generate_synthetic(const SyntheticConfig& config, std::uint64_t seed);

// Parental-education categories counted as the "high" group by default.
const std::vector<std::string>& high_parental_education_levels();

// key=value generator config file ('#' comments, blank lines ignored).
SyntheticConfig parse_generator_config(std::istream& in);
SyntheticConfig parse_generator_config_file(const std::string& path);

}  // namespace admitml
