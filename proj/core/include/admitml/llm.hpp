#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "admitml/features.hpp"
#include "admitml/table.hpp"

namespace admitml {

// Deterministic placeholder substitution: {Column} is replaced by the row's
// cell value; numeric cells are formatted with one decimal place. A
// placeholder naming an absent column or hitting a missing cell is an error
// naming the field.
std::string render_statement(const DataTable& table, std::size_t row,
                             const std::string& template_text);

// Built-in pseudo-statement template over the graduate-admission schema.
const std::string& default_statement_template();

struct LlmScore {
    std::size_t row = 0;
    double score = 0.0;  // always in [0, 1]
    std::string scorer_id;
    std::string raw_response;

    bool operator==(const LlmScore&) const = default;
};

class Scorer {
public:
    virtual ~Scorer() = default;
    virtual const std::string& id() const = 0;
    virtual LlmScore score(const std::string& statement, std::size_t row) = 0;
    // Clamp notices and other non-fatal diagnostics accumulated so far.
    virtual std::vector<std::string> warnings() const { return {}; }
};

// Offline deterministic scorer:
//   sigmoid(1.5 z_GRE + 1.5 z_TOEFL + 2.0 z_CGPA + 0.5 Research)
// where the z-scores standardize each column over the scored table
// (population stddev; a zero-variance column gives z = 0). The statement is
// ignored; the same row always yields the same score.
class MockScorer : public Scorer {
public:
    struct Columns {
        std::string gre = "GRE";
        std::string toefl = "TOEFL";
        std::string cgpa = "CGPA";
        std::string research = "Research";
    };

    explicit MockScorer(const DataTable& table);
    MockScorer(const DataTable& table, Columns columns);
    const std::string& id() const override;
    LlmScore score(const std::string& statement, std::size_t row) override;

private:
    std::string id_ = "mock";
    std::vector<double> z_gre_, z_toefl_, z_cgpa_, research_;
};

// Disk cache of scores keyed by (scorer id, statement). One JSON record per
// key; writes go through a temp file plus rename so concurrent scorers never
// observe a partial record.
class ScoreCache {
public:
    explicit ScoreCache(std::string directory);

    std::optional<double> lookup(const std::string& scorer_id, const std::string& statement) const;
    void store(const std::string& scorer_id, const std::string& statement, double score) const;

    const std::string& directory() const { return directory_; }

private:
    std::string path_for(const std::string& scorer_id, const std::string& statement) const;
    std::string directory_;
};

struct RemoteScorerConfig {
    std::string endpoint;  // scheme://host:port
    std::string path = "/score";
    std::string rubric;
    std::string auth_token;  // optional; sent as a bearer token
    int timeout_seconds = 10;
    int max_attempts = 3;
    int backoff_ms = 200;  // doubles after each failed attempt
    int max_in_flight = 4;
    std::optional<std::string> cache_dir;
};

// POSTs {statement, rubric} to the configured endpoint and reads a top-level
// numeric "score" from the JSON response, clamped to [0, 1]. Transient
// failures (connection, non-2xx, unparseable body) are retried with backoff;
// exhausting the attempts raises an error carrying the last response.
class RemoteScorer : public Scorer {
public:
    explicit RemoteScorer(RemoteScorerConfig config);
    ~RemoteScorer() override;
    const std::string& id() const override;
    LlmScore score(const std::string& statement, std::size_t row) override;
    std::vector<std::string> warnings() const override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Renders and scores every row; rows are scored in parallel with the
// scorer's own in-flight bound applying to remote calls.
std::vector<LlmScore> score_statements(Scorer& scorer, const DataTable& table,
                                       const std::string& template_text);

// Appends the scores as one trailing "LLM_score" column; everything else is
// unchanged. Scores are taken in row order.
FeatureMatrix augment_features(const FeatureMatrix& X, const std::vector<double>& scores);
FeatureMatrix augment_features(const FeatureMatrix& X, const std::vector<LlmScore>& scores);

}  // namespace admitml
