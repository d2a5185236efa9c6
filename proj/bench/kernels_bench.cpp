// Copyright 2026 The Triage Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference versus OpenMP kernel for each parallel hot path. The
// benchmark argument selects the execution mode: 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include <random>

#include "triage/active_learning.hpp"
#include "triage/features.hpp"
#include "triage/model.hpp"
#include "triage/random_forest.hpp"
#include "triage/synth.hpp"
#include "triage/text.hpp"
#include "triage/tfidf.hpp"
#include "test_util.hpp"

namespace triage {
namespace {

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

const Dataset& blobs() {
  static const Dataset ds = testing::two_gaussians(2000, 16, 1.0, 1);
  return ds;
}

const RandomForest& forest() {
  static const RandomForest rf = [] {
    RandomForestParams p;
    p.n_estimators = 100;
    p.seed = 2;
    return RandomForest::fit(blobs(), p);
  }();
  return rf;
}

const SynthCorpus& corpus() {
  static const SynthCorpus s = [] {
    SynthOptions o;
    o.n_tickets = 400;
    o.seed = 3;
    return generate_synthetic(o);
  }();
  return s;
}

void BM_RandomForestFit(benchmark::State& state) {
  RandomForestParams p;
  p.n_estimators = 50;
  p.seed = 4;
  blobs();
  for (auto _ : state) benchmark::DoNotOptimize(RandomForest::fit(blobs(), p, mode(state)));
}

void BM_PredictProbaBatch(benchmark::State& state) {
  forest();  // build the fixture outside the timed loop
  for (auto _ : state) benchmark::DoNotOptimize(predict_proba_batch(forest(), blobs().X, mode(state)));
}

void BM_EntropyTable(benchmark::State& state) {
  const std::array<const Classifier*, kNumExpertTargets> models = {&forest(), &forest(), &forest()};
  blobs();
  for (auto _ : state) benchmark::DoNotOptimize(entropy_table(models, blobs().X, mode(state)));
}

void BM_AssembleBatch(benchmark::State& state) {
  const auto derived = expand_corpus(corpus().corpus);
  FeatureOptions opts;
  opts.text_mode = TextMode::tfidf;
  const auto spec = FeatureSpec::fit(derived, corpus().schema, opts);
  for (auto _ : state) benchmark::DoNotOptimize(spec.assemble_batch(derived, mode(state)));
}

void BM_TfidfTransformBatch(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::vector<TokenList> docs(5000);
  for (auto& d : docs) {
    for (int w = 0; w < 40; ++w) d.push_back("w" + std::to_string(rng() % 3000));
  }
  const auto model = tfidf_fit(docs, 1000);
  for (auto _ : state) benchmark::DoNotOptimize(tfidf_transform_batch(model, docs, mode(state)));
}

BENCHMARK(BM_RandomForestFit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictProbaBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EntropyTable)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TfidfTransformBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace triage

BENCHMARK_MAIN();
