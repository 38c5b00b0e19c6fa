#include "admitml/llm.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <semaphore>
#include <stdexcept>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "admitml/parallel.hpp"
#include "model_internal.hpp"

namespace admitml {
namespace {

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string format_cell(const Cell& cell) {
    if (cell.is_category()) return cell.category();
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", cell.number());
    return buf;
}

// Column values as doubles; errors keep the "missing field" wording shared
// with render_statement so callers see one vocabulary.
std::vector<double> numeric_column(const DataTable& table, const std::string& name) {
    const auto idx = table.find_column(name);
    if (!idx) {
        throw std::invalid_argument("mock scorer: missing field " + name);
    }
    if (table.columns()[*idx].kind != ColumnKind::Numeric) {
        throw std::invalid_argument("mock scorer: field " + name + " is categorical, expected numeric");
    }
    std::vector<double> out;
    out.reserve(table.row_count());
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        const Cell& cell = table.at(r, *idx);
        if (cell.is_missing()) {
            throw std::runtime_error("mock scorer: column '" + name + "' has missing values at row " +
                                     std::to_string(r) + " (impute first)");
        }
        out.push_back(cell.number());
    }
    return out;
}

// Population z-scores; a zero-variance column standardizes to all zeros.
std::vector<double> zscores(std::vector<double> values) {
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double variance = 0.0;
    for (double v : values) variance += (v - mean) * (v - mean);
    variance /= n;
    const double sd = std::sqrt(variance);
    for (double& v : values) {
        v = sd > 0.0 ? (v - mean) / sd : 0.0;
    }
    return values;
}

}  // namespace

std::string render_statement(const DataTable& table, std::size_t row,
                             const std::string& template_text) {
    if (row >= table.row_count()) {
        throw std::invalid_argument("render_statement: row " + std::to_string(row) +
                                    " out of range");
    }
    std::string out;
    out.reserve(template_text.size());
    std::size_t i = 0;
    while (i < template_text.size()) {
        const char c = template_text[i];
        if (c != '{') {
            out.push_back(c);
            ++i;
            continue;
        }
        const auto close = template_text.find('}', i + 1);
        if (close == std::string::npos) {
            throw std::invalid_argument("render_statement: unclosed placeholder at offset " +
                                        std::to_string(i));
        }
        const std::string name = template_text.substr(i + 1, close - i - 1);
        const auto idx = table.find_column(name);
        if (!idx) {
            throw std::invalid_argument("render_statement: missing field " + name);
        }
        const Cell& cell = table.at(row, *idx);
        if (cell.is_missing()) {
            throw std::runtime_error("render_statement: missing field " + name + " at row " +
                                     std::to_string(row));
        }
        out += format_cell(cell);
        i = close + 1;
    }
    return out;
}

const std::string& default_statement_template() {
    static const std::string kTemplate =
        "I am applying for graduate study with a GRE score of {GRE}, a TOEFL score of {TOEFL}, "
        "and a CGPA of {CGPA}. My statement of purpose was rated {SOP} and my recommendation "
        "letters {LOR}. Research experience: {Research}.";
    return kTemplate;
}

MockScorer::MockScorer(const DataTable& table) : MockScorer(table, Columns{}) {}

MockScorer::MockScorer(const DataTable& table, Columns columns)
    : z_gre_(zscores(numeric_column(table, columns.gre))),
      z_toefl_(zscores(numeric_column(table, columns.toefl))),
      z_cgpa_(zscores(numeric_column(table, columns.cgpa))),
      research_(numeric_column(table, columns.research)) {}

const std::string& MockScorer::id() const { return id_; }

LlmScore MockScorer::score(const std::string& statement, std::size_t row) {
    (void)statement;
    if (row >= z_gre_.size()) {
        throw std::invalid_argument("mock scorer: row " + std::to_string(row) + " out of range");
    }
    const double logit =
        1.5 * z_gre_[row] + 1.5 * z_toefl_[row] + 2.0 * z_cgpa_[row] + 0.5 * research_[row];
    LlmScore out;
    out.row = row;
    out.score = detail::sigmoid(logit);
    out.scorer_id = id_;
    return out;
}

ScoreCache::ScoreCache(std::string directory) : directory_(std::move(directory)) {
    std::error_code ec;
    std::filesystem::create_directories(directory_, ec);
    if (ec) {
        throw std::runtime_error("score cache: cannot create directory '" + directory_ +
                                 "': " + ec.message());
    }
}

std::string ScoreCache::path_for(const std::string& scorer_id, const std::string& statement) const {
    const std::string key = scorer_id + '\0' + statement;
    return (std::filesystem::path(directory_) / (hex64(fnv1a64(key)) + ".json")).string();
}

std::optional<double> ScoreCache::lookup(const std::string& scorer_id,
                                         const std::string& statement) const {
    std::ifstream in(path_for(scorer_id, statement));
    if (!in) return std::nullopt;
    try {
        const auto record = nlohmann::json::parse(in);
        // Hash collisions and stale formats read as misses, never as errors.
        if (record.value("scorer_id", "") != scorer_id || record.value("statement", "") != statement) {
            return std::nullopt;
        }
        if (!record.contains("score") || !record["score"].is_number()) {
            return std::nullopt;
        }
        return record["score"].get<double>();
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

void ScoreCache::store(const std::string& scorer_id, const std::string& statement,
                       double score) const {
    static std::atomic<unsigned long long> counter{0};
    const nlohmann::json record = {
        {"scorer_id", scorer_id}, {"statement", statement}, {"score", score}};
    const std::string target = path_for(scorer_id, statement);
    const std::string temp = target + ".tmp." + std::to_string(::getpid()) + "." +
                             std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(temp);
        if (!out) {
            throw std::runtime_error("score cache: cannot write '" + temp + "'");
        }
        out << record.dump(2) << '\n';
    }
    // Same-directory rename is atomic, so readers see whole records only.
    std::error_code ec;
    std::filesystem::rename(temp, target, ec);
    if (ec) {
        std::filesystem::remove(temp);
        throw std::runtime_error("score cache: cannot publish '" + target + "': " + ec.message());
    }
}

struct RemoteScorer::Impl {
    RemoteScorerConfig config;
    std::string id;
    std::optional<ScoreCache> cache;
    std::counting_semaphore<> in_flight;
    mutable std::mutex mutex;
    std::vector<std::string> warnings;

    explicit Impl(RemoteScorerConfig cfg)
        : config(std::move(cfg)),
          id("remote:" + config.endpoint + config.path + "#" + hex64(fnv1a64(config.rubric))),
          in_flight(config.max_in_flight) {
        if (config.endpoint.empty()) {
            throw std::invalid_argument("remote scorer: endpoint must be set");
        }
        if (config.max_attempts < 1) {
            throw std::invalid_argument("remote scorer: max_attempts must be at least 1");
        }
        if (config.max_in_flight < 1) {
            throw std::invalid_argument("remote scorer: max_in_flight must be at least 1");
        }
        if (config.cache_dir) {
            cache.emplace(*config.cache_dir);
        }
    }

    void warn(std::string message) {
        const std::lock_guard<std::mutex> lock(mutex);
        warnings.push_back(std::move(message));
    }
};

RemoteScorer::RemoteScorer(RemoteScorerConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

RemoteScorer::~RemoteScorer() = default;

const std::string& RemoteScorer::id() const { return impl_->id; }

std::vector<std::string> RemoteScorer::warnings() const {
    const std::lock_guard<std::mutex> lock(impl_->mutex);
    return impl_->warnings;
}

LlmScore RemoteScorer::score(const std::string& statement, std::size_t row) {
    if (impl_->cache) {
        if (const auto hit = impl_->cache->lookup(impl_->id, statement)) {
            LlmScore out;
            out.row = row;
            out.score = *hit;
            out.scorer_id = impl_->id;
            out.raw_response = "(cached)";
            return out;
        }
    }

    impl_->in_flight.acquire();
    struct Release {
        std::counting_semaphore<>& sem;
        ~Release() { sem.release(); }
    } release{impl_->in_flight};

    const std::string body =
        nlohmann::json{{"statement", statement}, {"rubric", impl_->config.rubric}}.dump();
    std::string last_failure = "(no attempt made)";
    for (int attempt = 0; attempt < impl_->config.max_attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(impl_->config.backoff_ms << (attempt - 1)));
        }
        httplib::Client client(impl_->config.endpoint);
        client.set_connection_timeout(impl_->config.timeout_seconds);
        client.set_read_timeout(impl_->config.timeout_seconds);
        if (!impl_->config.auth_token.empty()) {
            client.set_bearer_token_auth(impl_->config.auth_token);
        }
        auto res = client.Post(impl_->config.path, body, "application/json");
        if (!res) {
            last_failure = "connection failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_failure = "HTTP " + std::to_string(res->status) + ": " + res->body;
            continue;
        }
        double raw_score = 0.0;
        try {
            const auto parsed = nlohmann::json::parse(res->body);
            if (!parsed.contains("score") || !parsed["score"].is_number()) {
                last_failure = "response lacks a numeric top-level \"score\": " + res->body;
                continue;
            }
            raw_score = parsed["score"].get<double>();
        } catch (const nlohmann::json::exception& e) {
            last_failure = std::string("unparseable response body (") + e.what() + "): " + res->body;
            continue;
        }
        double clamped = raw_score;
        if (raw_score < 0.0 || raw_score > 1.0 || !std::isfinite(raw_score)) {
            clamped = std::isfinite(raw_score) ? std::clamp(raw_score, 0.0, 1.0) : 0.0;
            impl_->warn("row " + std::to_string(row) + ": score " + std::to_string(raw_score) +
                        " outside [0, 1], clamped to " + std::to_string(clamped));
        }
        if (impl_->cache) {
            impl_->cache->store(impl_->id, statement, clamped);
        }
        LlmScore out;
        out.row = row;
        out.score = clamped;
        out.scorer_id = impl_->id;
        out.raw_response = res->body;
        return out;
    }
    throw std::runtime_error("remote scorer: giving up after " +
                             std::to_string(impl_->config.max_attempts) +
                             " attempts; last failure: " + last_failure);
}

std::vector<LlmScore> score_statements(Scorer& scorer, const DataTable& table,
                                       const std::string& template_text) {
    std::vector<std::string> statements;
    statements.reserve(table.row_count());
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        statements.push_back(render_statement(table, r, template_text));
    }
    std::vector<LlmScore> scores(statements.size());
    parallel_for(statements.size(), [&](std::size_t r) { scores[r] = scorer.score(statements[r], r); });
    return scores;
}

FeatureMatrix augment_features(const FeatureMatrix& X, const std::vector<double>& scores) {
    X.validate();
    if (scores.size() != X.row_count()) {
        throw std::invalid_argument("augment_features: " + std::to_string(scores.size()) +
                                    " scores for " + std::to_string(X.row_count()) + " rows");
    }
    for (double s : scores) {
        if (!(s >= 0.0 && s <= 1.0)) {
            throw std::invalid_argument("augment_features: scores must lie in [0, 1]");
        }
    }
    for (const std::string& name : X.feature_names) {
        if (name == "LLM_score") {
            throw std::invalid_argument("augment_features: feature \"LLM_score\" already present");
        }
    }
    FeatureMatrix out = X;
    Matrix widened(X.values.rows(), X.values.cols() + 1);
    for (std::size_t r = 0; r < X.values.rows(); ++r) {
        for (std::size_t c = 0; c < X.values.cols(); ++c) {
            widened(r, c) = X.values(r, c);
        }
        widened(r, X.values.cols()) = scores[r];
    }
    out.values = std::move(widened);
    out.feature_names.push_back("LLM_score");
    return out;
}

FeatureMatrix augment_features(const FeatureMatrix& X, const std::vector<LlmScore>& scores) {
    std::vector<double> values;
    values.reserve(scores.size());
    for (const LlmScore& s : scores) values.push_back(s.score);
    return augment_features(X, values);
}

}  // namespace admitml
