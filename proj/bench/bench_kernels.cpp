// Serial reference kernels vs their OpenMP counterparts.
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "vismap/eval_harness.hpp"
#include "vismap/localization.hpp"
#include "vismap/scene_retrieval.hpp"
#include "vismap/synthetic.hpp"

using namespace vismap;

namespace {

struct World {
    Traversal map;
    Traversal queries;
    ReferenceSplit refs;
    DescriptorStore store;
    SceneClassifier classifier;
    LocalizationMap loc_map;

    static SyntheticSpec spec(std::size_t frames) {
        SyntheticSpec s;
        s.name = "map";
        s.classes = default_classes(4, 3);
        s.frames_per_class = frames / 10;
        s.runs_per_class = 4;
        s.undefined_frames = frames - 4 * s.frames_per_class;
        s.dim = 64;
        s.seed = 3;
        return s;
    }

    explicit World(std::size_t frames)
        : map(generate_synthetic(spec(frames))),
          queries([&] {
              auto s = spec(frames);
              s.noise_seed = 99;
              return generate_synthetic(s);
          }()),
          refs(select_references(map, 0.25, 0.10, 1)),
          store(map),
          classifier(refs.galleries, store),
          loc_map(sample_distance(map, 20.0), map) {}
};

World& world(std::size_t frames) {
    static std::map<std::size_t, std::unique_ptr<World>> cache;
    auto& w = cache[frames];
    if (!w) w = std::make_unique<World>(frames);
    return *w;
}

void BM_classify_serial(benchmark::State& state) {
    auto& w = world(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(reference::classify_traversal(w.queries, w.classifier));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_classify_parallel(benchmark::State& state) {
    auto& w = world(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(classify_traversal(w.queries, w.classifier));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_localize_serial(benchmark::State& state) {
    auto& w = world(static_cast<std::size_t>(state.range(0)));
    const LocalizationConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(reference::evaluate_localization(w.queries, w.loc_map, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_localize_parallel(benchmark::State& state) {
    auto& w = world(static_cast<std::size_t>(state.range(0)));
    const LocalizationConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_localization(w.queries, w.loc_map, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(BM_classify_serial)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_classify_parallel)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_localize_serial)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_localize_parallel)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
