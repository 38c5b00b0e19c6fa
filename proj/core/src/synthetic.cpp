#include "admitml/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "admitml/rng.hpp"

namespace admitml {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double round_to(double v, double step) { return std::round(v / step) * step; }

double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

constexpr double kStrongGreMin = 320.0;
constexpr double kStrongCgpaMin = 9.5;
constexpr double kWeakGreMax = 300.0;
constexpr double kWeakCgpaMax = 8.0;

struct Applicant {
    double gre, toefl, cgpa, sop, lor, research;
    std::string gender;
    std::string parental;
    double chance;
};

const std::vector<std::string> kParentalLevels = {
    "some high school", "high school",      "some college",
    "associate's degree", "bachelor's degree", "master's degree"};
const std::vector<double> kParentalWeights = {0.10, 0.22, 0.20, 0.13, 0.22, 0.13};

}  // namespace

const std::vector<std::string>& high_parental_education_levels() {
    static const std::vector<std::string> high = {"bachelor's degree", "master's degree"};
    return high;
}

void SyntheticConfig::validate() const {
    if (rows == 0) throw std::invalid_argument("SyntheticConfig: rows must be positive");
    if (anomaly_count > rows)
        throw std::invalid_argument("SyntheticConfig: anomaly_count exceeds row count");
    if (noise_sd < 0.0) throw std::invalid_argument("SyntheticConfig: noise_sd must be non-negative");
}

DataTable generate_synthetic(const SyntheticConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(derive_seed(seed, "synthetic"));

    std::vector<Applicant> people;
    people.reserve(config.rows);

    for (std::size_t i = 0; i < config.rows; ++i) {
        Applicant p;
        const double ability = rng.next_normal();

        p.gre = clamp(std::round(316.0 + 9.0 * ability + 4.5 * rng.next_normal()), 260.0, 340.0);
        p.toefl = clamp(std::round(107.0 + 5.0 * ability + 3.0 * rng.next_normal()), 92.0, 120.0);
        p.cgpa = clamp(round_to(8.6 + 0.55 * ability + 0.30 * rng.next_normal(), 0.01), 6.0, 10.0);
        p.sop = clamp(round_to(3.0 + 0.5 * ability + 0.5 * rng.next_normal(), 0.5), 1.0, 5.0);
        p.lor = clamp(round_to(3.0 + 0.4 * ability + 0.6 * rng.next_normal(), 0.5), 1.0, 5.0);
        p.research = rng.bernoulli(sigmoid(0.8 * ability)) ? 1.0 : 0.0;
        p.gender = rng.bernoulli(0.5) ? "Female" : "Male";

        const double pick = rng.next_double();
        double cumulative = 0.0;
        p.parental = kParentalLevels.back();
        for (std::size_t level = 0; level < kParentalLevels.size(); ++level) {
            cumulative += kParentalWeights[level];
            if (pick < cumulative) {
                p.parental = kParentalLevels[level];
                break;
            }
        }

        const auto& high_levels = high_parental_education_levels();
        const bool high_parental =
            std::find(high_levels.begin(), high_levels.end(), p.parental) != high_levels.end();

        const double zg = (p.gre - 316.0) / 9.0;
        const double zt = (p.toefl - 107.0) / 5.0;
        const double zc = (p.cgpa - 8.6) / 0.55;
        double logit = 0.15 + 1.1 * zg + 0.9 * zt + 1.3 * zc + 0.25 * (p.sop - 3.0) +
                       0.25 * (p.lor - 3.0) + 0.45 * p.research;
        logit += p.gender == "Female" ? config.gender_bias / 2.0 : -config.gender_bias / 2.0;
        logit += high_parental ? config.parental_bias / 2.0 : -config.parental_bias / 2.0;
        logit += config.noise_sd * rng.next_normal();
        p.chance = sigmoid(logit);

        // Keep un-injected rows consistent with the profile rule: strong
        // profiles land above the 0.5 label threshold, weak ones below, so
        // clean_anomalies removes exactly the injected rows.
        const bool strong = p.gre >= kStrongGreMin && p.cgpa >= kStrongCgpaMin;
        const bool weak = p.gre <= kWeakGreMax && p.cgpa <= kWeakCgpaMax;
        if (strong && p.chance < 0.55) p.chance = 0.55 + 0.40 * p.chance;
        if (weak && p.chance > 0.45) p.chance = 0.05 + 0.40 * p.chance;
        p.chance = round_to(p.chance, 0.0001);

        people.push_back(std::move(p));
    }

    // Label-flipped anomalies, alternating between the two profile shapes.
    const std::vector<std::size_t> targets = rng.sample_indices(config.rows, config.anomaly_count);
    for (std::size_t k = 0; k < targets.size(); ++k) {
        Applicant& p = people[targets[k]];
        if (k % 2 == 0) {
            p.gre = 320.0 + static_cast<double>(rng.next_below(21));
            p.cgpa = round_to(rng.uniform(9.5, 10.0), 0.01);
            p.toefl = 110.0 + static_cast<double>(rng.next_below(11));
            p.sop = clamp(round_to(rng.uniform(3.5, 5.0), 0.5), 1.0, 5.0);
            p.lor = clamp(round_to(rng.uniform(3.5, 5.0), 0.5), 1.0, 5.0);
            p.research = 1.0;
            p.chance = round_to(0.05 + 0.40 * rng.next_double(), 0.0001);  // strong profile, rejected
        } else {
            p.gre = 260.0 + static_cast<double>(rng.next_below(41));
            p.cgpa = round_to(rng.uniform(6.0, 8.0), 0.01);
            p.toefl = 92.0 + static_cast<double>(rng.next_below(14));
            p.sop = clamp(round_to(rng.uniform(1.0, 2.5), 0.5), 1.0, 5.0);
            p.lor = clamp(round_to(rng.uniform(1.0, 2.5), 0.5), 1.0, 5.0);
            p.research = 0.0;
            p.chance = round_to(0.55 + 0.40 * rng.next_double(), 0.0001);  // weak profile, admitted
        }
    }

    std::vector<Column> columns = {
        {"GRE", ColumnKind::Numeric},      {"TOEFL", ColumnKind::Numeric},
        {"CGPA", ColumnKind::Numeric},     {"SOP", ColumnKind::Numeric},
        {"LOR", ColumnKind::Numeric},      {"Research", ColumnKind::Numeric},
        {"Gender", ColumnKind::Categorical}, {"Parental_Education", ColumnKind::Categorical},
        {"Admit_Chance", ColumnKind::Numeric}};

    std::vector<std::vector<Cell>> rows;
    rows.reserve(people.size());
    for (const Applicant& p : people) {
        std::vector<Cell> row;
        row.reserve(columns.size());
        row.emplace_back(p.gre);
        row.emplace_back(p.toefl);
        row.emplace_back(p.cgpa);
        row.emplace_back(p.sop);
        row.emplace_back(p.lor);
        row.emplace_back(p.research);
        row.emplace_back(p.gender);
        row.emplace_back(p.parental);
        row.emplace_back(p.chance);
        rows.push_back(std::move(row));
    }

    return DataTable(std::move(columns), std::move(rows));
}

SyntheticConfig parse_generator_config(std::istream& in) {
    SyntheticConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("generator config line " + std::to_string(line_no) +
                                     ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto strip = [](std::string& s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
        };
        strip(key);
        strip(value);

        try {
            if (key == "rows") config.rows = std::stoul(value);
            else if (key == "anomalies") config.anomaly_count = std::stoul(value);
            else if (key == "gender_bias") config.gender_bias = std::stod(value);
            else if (key == "parental_bias") config.parental_bias = std::stod(value);
            else if (key == "noise_sd") config.noise_sd = std::stod(value);
            else throw std::runtime_error("unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw std::runtime_error("generator config line " + std::to_string(line_no) +
                                     ": bad value for '" + key + "'");
        }
    }
    config.validate();
    return config;
}

SyntheticConfig parse_generator_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("generator config: cannot open '" + path + "'");
    return parse_generator_config(in);
}

}  // namespace admitml
