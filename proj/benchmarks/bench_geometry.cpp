#include <benchmark/benchmark.h>

#include <cmath>

#include "stentx/geometry2d.hpp"
#include "stentx/synth.hpp"

namespace {

const stentx::SynthLesion& lesion() {
    static const auto l = [] {
        stentx::SynthConfig c;
        c.n_lesions = 1;
        return stentx::generate_lesion(c, stentx::plan_dataset(c).front());
    }();
    return l;
}

void BM_LumenFrameFeatures(benchmark::State& state) {
    const auto& l = lesion();
    const auto& frame = l.pre.frames[l.pre.frames.size() / 2];
    for (auto _ : state)
        benchmark::DoNotOptimize(stentx::compute_lumen_frame_features(frame, l.pre.meta.pixel_spacing_mm, 8.0));
}
BENCHMARK(BM_LumenFrameFeatures);

void BM_CalcFrameFeatures(benchmark::State& state) {
    const auto& l = lesion();
    std::size_t k = 0;
    for (std::size_t f = 0; f < l.pre.frames.size(); ++f)
        if (l.pre.frames[f].count(stentx::Label::calcification) > l.pre.frames[k].count(stentx::Label::calcification))
            k = f;
    for (auto _ : state)
        benchmark::DoNotOptimize(stentx::compute_calc_frame_features(l.pre.frames[k], l.pre.meta.pixel_spacing_mm));
}
BENCHMARK(BM_CalcFrameFeatures);

void BM_GenerateLesion(benchmark::State& state) {
    stentx::SynthConfig c;
    c.n_lesions = 1;
    const auto plan = stentx::plan_dataset(c).front();
    for (auto _ : state) benchmark::DoNotOptimize(stentx::generate_lesion(c, plan));
}
BENCHMARK(BM_GenerateLesion)->Unit(benchmark::kMillisecond);

}  // namespace
