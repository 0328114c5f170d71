#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "adloc/evaluation.hpp"

namespace {

std::string words(std::size_t n, unsigned seed) {
    static const char* vocab[] = {"summer", "sale", "up", "to", "off", "new", "été", "soldes", "jusqu'à", "offre"};
    std::mt19937 rng(seed);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) s += ' ';
        s += vocab[rng() % 10];
    }
    return s;
}

void BM_Levenshtein(benchmark::State& state) {
    const auto a = words(static_cast<std::size_t>(state.range(0)), 1);
    const auto b = words(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(adloc::evaluation::levenshtein(a, b));
}
BENCHMARK(BM_Levenshtein)->Arg(4)->Arg(32)->Arg(256);

void BM_Wer(benchmark::State& state) {
    const auto a = words(200, 3), b = words(200, 4);
    for (auto _ : state) benchmark::DoNotOptimize(adloc::evaluation::wer(a, b));
}
BENCHMARK(BM_Wer);

void BM_Ssim(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    std::mt19937 rng(5);
    adloc::Raster a(side, side, 3), b(side, side, 3);
    for (auto& v : a.pixels()) v = static_cast<std::uint8_t>(rng());
    for (auto& v : b.pixels()) v = static_cast<std::uint8_t>(rng());
    for (auto _ : state) benchmark::DoNotOptimize(adloc::evaluation::ssim(a, b));
}
BENCHMARK(BM_Ssim)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
