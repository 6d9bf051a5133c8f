// Parallel kernels against their serial references.
#include <benchmark/benchmark.h>

#include <numeric>

#include "semlab/featurize.hpp"
#include "semlab/forest.hpp"
#include "semlab/pipeline.hpp"
#include "semlab/sampling.hpp"
#include "semlab/synth.hpp"

using namespace semlab;

namespace {

struct Fixture {
    LabeledCorpus corpus;
    std::vector<LabeledAttribute> attrs;
    std::vector<const Attribute*> ptrs;
    std::vector<std::uint64_t> streams;
    ClassProfileIndex profiles;

    Fixture() {
        SynthesisSpec spec;
        spec.sources = 6;
        spec.labels = 8;
        spec.rows_min = 200;
        spec.rows_max = 400;
        corpus = generate_synthetic(spec, 1);
        std::vector<std::size_t> all(corpus.sources.size());
        std::iota(all.begin(), all.end(), 0);
        attrs = training_attributes(corpus, all, true);
        std::vector<TrainingAttribute> train;
        for (const auto& a : attrs) {
            ptrs.push_back(a.attribute);
            streams.push_back(bag_stream_id(a.attribute->source_name, a.attribute->name, SamplingPhase::Train));
            train.push_back({a.attribute, a.label});
        }
        profiles = build_class_profiles(train);
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

template <bool Parallel>
void BM_MakeBags(benchmark::State& state) {
    const auto& f = fixture();
    const BagConfig cfg{50, 100, 0};
    for (auto _ : state) {
        auto bags = Parallel ? make_bags_batch(f.ptrs, cfg, f.streams) : make_bags_batch_serial(f.ptrs, cfg, f.streams);
        benchmark::DoNotOptimize(bags);
    }
}

template <bool Parallel>
void BM_Featurize(benchmark::State& state) {
    const auto& f = fixture();
    const Featurizer featurizer(FeatureSet::All, &f.profiles);
    std::vector<std::vector<double>> names;
    for (const auto* a : f.ptrs) names.push_back(featurizer.name_block(a->name));
    std::vector<FeatureJob> jobs;
    for (std::size_t i = 0; i < f.ptrs.size(); ++i) jobs.push_back({f.ptrs[i]->values, names[i]});
    for (auto _ : state) {
        auto out = Parallel ? featurize_batch(featurizer, jobs) : featurize_batch_serial(featurizer, jobs);
        benchmark::DoNotOptimize(out);
    }
}

Dataset random_dataset(std::size_t rows, std::size_t cols, std::size_t classes) {
    Dataset d{rows, cols, classes, std::vector<double>(rows * cols), std::vector<int>(rows)};
    Rng rng(9);
    for (auto& v : d.x) v = rng.unit();
    for (std::size_t i = 0; i < rows; ++i) d.y[i] = static_cast<int>((d.x[i * cols] * classes)) % classes;
    return d;
}

template <bool Parallel>
void BM_Forest(benchmark::State& state) {
    static const Dataset data = random_dataset(2000, 60, 8);
    ForestConfig cfg;
    cfg.n_trees = 64;
    for (auto _ : state) {
        auto forest = Parallel ? train_random_forest(data, cfg) : train_random_forest_serial(data, cfg);
        benchmark::DoNotOptimize(forest);
    }
}

}  // namespace

BENCHMARK(BM_MakeBags<true>)->Name("make_bags/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MakeBags<false>)->Name("make_bags/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Featurize<true>)->Name("featurize/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Featurize<false>)->Name("featurize/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Forest<true>)->Name("forest/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Forest<false>)->Name("forest/serial")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
