#include <string>

#include <benchmark/benchmark.h>

#include "biasscope/corpus.hpp"
#include "biasscope/heuristic.hpp"
#include "biasscope/promptkit.hpp"
#include "biasscope/taxonomy.hpp"
#include "biasscope/verdict.hpp"

using namespace biasscope;

namespace {

std::string prose(std::size_t approx_chars) {
  static const std::string para =
      "Ever since the new policy was introduced, crime has gone up, which is why it must be repealed. "
      "Everyone knows that our rivals think like us and would never do what we would not do.\n\n"
      "So you're saying we should abandon all defence spending? Obviously that proves the point. ";
  std::string out;
  while (out.size() < approx_chars) out += para;
  return out;
}

void BM_Split(benchmark::State& state) {
  SourceMeta meta;
  meta.source_name = "bench";
  const auto doc = ingest_document(prose(static_cast<std::size_t>(state.range(0))), meta);
  SplitterConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(split_document(doc, cfg));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(doc.text.size()));
}
BENCHMARK(BM_Split)->Arg(2'000)->Arg(20'000)->Arg(200'000);

void BM_BuildPrompt(benchmark::State& state) {
  const auto text = prose(1500);
  const auto mode = state.range(0) == 0 ? PromptMode::Structured : PromptMode::Basic;
  const auto& profile = profile_of(BiasType::ConfirmationBias);
  for (auto _ : state) benchmark::DoNotOptimize(build_prompt(mode, profile, text));
}
BENCHMARK(BM_BuildPrompt)->Arg(0)->Arg(1);

void BM_ParseVerdict(benchmark::State& state) {
  const std::string strict = "VERDICT: YES\nRATIONALE: The author misstates the opposing view before rebutting it.";
  const std::string loose =
      "After reading carefully, I would say the bias is present here, mostly because the rebuttal targets a claim "
      "nobody made.";
  const auto& completion = state.range(0) == 0 ? strict : loose;
  for (auto _ : state) benchmark::DoNotOptimize(try_parse_verdict(completion));
}
BENCHMARK(BM_ParseVerdict)->Arg(0)->Arg(1);

void BM_Heuristic(benchmark::State& state) {
  const auto text = prose(1500);
  for (auto _ : state) {
    for (BiasType b : kAllBiases) benchmark::DoNotOptimize(heuristic_detect(b, text));
  }
}
BENCHMARK(BM_Heuristic);

}  // namespace
BENCHMARK_MAIN();
