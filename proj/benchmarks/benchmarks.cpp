// Microbenchmarks for the pipeline's hot paths: model training, scoring,
// cross-validation, metrics, cleaning and CSV ingest. Fixtures are the
// bundled synthetic admissions schema, built once per size outside timing.

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "admitml/evaluation.hpp"
#include "admitml/explain.hpp"
#include "admitml/features.hpp"
#include "admitml/ingest.hpp"
#include "admitml/model.hpp"
#include "admitml/pipeline.hpp"
#include "admitml/rng.hpp"
#include "admitml/synthetic.hpp"
#include "admitml/table.hpp"

using namespace admitml;

namespace {

PipelineConfig fixture_config(std::size_t rows, std::size_t anomalies) {
    PipelineConfig config = parse_pipeline_config("{}");
    SyntheticConfig synthetic;
    synthetic.rows = rows;
    synthetic.anomaly_count = anomalies;
    config.source.synthetic = synthetic;
    config.seed = 77;
    return config;
}

const DataTable& admissions_table(std::size_t rows) {
    static std::map<std::size_t, DataTable> cache;
    auto it = cache.find(rows);
    if (it == cache.end()) {
        it = cache.emplace(rows, prepare_data(fixture_config(rows, rows / 10)).table).first;
    }
    return it->second;
}

// Scaled features, as the training stages consume them.
const FeatureMatrix& admissions_features(std::size_t rows) {
    static std::map<std::size_t, FeatureMatrix> cache;
    auto it = cache.find(rows);
    if (it == cache.end()) {
        const PipelineConfig config = fixture_config(rows, 0);
        FeatureMatrix matrix =
            build_features(prepare_data(config).table, feature_spec_of(config)).matrix;
        matrix.values = apply_scaler(fit_scaler(matrix.values), matrix.values);
        it = cache.emplace(rows, std::move(matrix)).first;
    }
    return it->second;
}

void bm_train_logistic(benchmark::State& state) {
    const FeatureMatrix& X = admissions_features(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_logistic(X));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_train_logistic)->Arg(400)->Arg(2000)->Unit(benchmark::kMillisecond);

void bm_train_naive_bayes(benchmark::State& state) {
    const FeatureMatrix& X = admissions_features(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_naive_bayes(X));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_train_naive_bayes)->Arg(2000)->Unit(benchmark::kMillisecond);

void bm_train_forest(benchmark::State& state) {
    const FeatureMatrix& X = admissions_features(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_random_forest(X, ForestConfig{}, 13));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_train_forest)->Arg(400)->Arg(2000)->Unit(benchmark::kMillisecond);

void bm_train_mlp(benchmark::State& state) {
    const FeatureMatrix& X = admissions_features(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_mlp(X, MlpConfig{}, 13));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_train_mlp)->Arg(400)->Arg(2000)->Unit(benchmark::kMillisecond);

void bm_train_stacked(benchmark::State& state) {
    const FeatureMatrix& X = admissions_features(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_stacked(X, ModelConfigs{}, 13));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_train_stacked)->Arg(400)->Unit(benchmark::kMillisecond);

void bm_predict_forest(benchmark::State& state) {
    const FeatureMatrix& X = admissions_features(state.range(0));
    const TrainedClassifier model = train_random_forest(X, ForestConfig{}, 13);
    for (auto _ : state) {
        benchmark::DoNotOptimize(predict_proba(model, X));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_predict_forest)->Arg(2000)->Unit(benchmark::kMillisecond);

void bm_kfold_logistic(benchmark::State& state) {
    const FeatureMatrix& X = admissions_features(state.range(0));
    CvConfig cv;
    cv.seed = 13;
    for (auto _ : state) {
        benchmark::DoNotOptimize(kfold_cv(X, ModelKind::LogisticRegression, ModelConfigs{}, cv));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_kfold_logistic)->Arg(1000)->Unit(benchmark::kMillisecond);

void bm_permutation_importance(benchmark::State& state) {
    const FeatureMatrix& X = admissions_features(1000);
    const TrainedClassifier model = train_logistic(X);
    for (auto _ : state) {
        benchmark::DoNotOptimize(permutation_importance(model, X, 10, 13));
    }
}
BENCHMARK(bm_permutation_importance)->Unit(benchmark::kMillisecond);

void bm_auroc(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(13);
    std::vector<int> labels(n);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = i % 2;
        scores[i] = rng.next_double();
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(auroc(labels, scores));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_auroc)->Arg(10000);

void bm_clean_anomalies(benchmark::State& state) {
    const DataTable& table = admissions_table(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(clean_anomalies(table, CleaningRule{}));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_clean_anomalies)->Arg(2000);

void bm_parse_csv(benchmark::State& state) {
    const std::string csv = serialize_csv(admissions_table(state.range(0)));
    for (auto _ : state) {
        std::istringstream in(csv);
        benchmark::DoNotOptimize(parse_csv(in));
    }
    state.SetBytesProcessed(state.iterations() * csv.size());
}
BENCHMARK(bm_parse_csv)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
