/*
 * Copyright 2026 The CAT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// OpenMP kernels against their serial references. Arguments: batch size,
// concept count.

#include <benchmark/benchmark.h>

#include <random>

#include "cat/concept_encoder.h"
#include "cat/taylornet.h"

namespace cat {
namespace {

Matrix RandomInputs(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

TaylorNet BenchNet(std::size_t d, int order) {
  return InitTaylorNet(d, 2, RankConfig::Uniform(order, order <= 2 ? 8 : 16), 1);
}

void BM_Forward(benchmark::State& state) {
  const TaylorNet net = BenchNet(state.range(1), 2);
  const Matrix z = RandomInputs(state.range(0), net.input_dim, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Forward(net, z));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ForwardReference(benchmark::State& state) {
  const TaylorNet net = BenchNet(state.range(1), 2);
  const Matrix z = RandomInputs(state.range(0), net.input_dim, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ForwardReference(net, z));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Backward(benchmark::State& state) {
  const TaylorNet net = BenchNet(state.range(1), 2);
  const Matrix z = RandomInputs(state.range(0), net.input_dim, 2);
  const Matrix up = RandomInputs(state.range(0), net.output_dim, 3);
  for (auto _ : state) benchmark::DoNotOptimize(Backward(net, z, up));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BackwardReference(benchmark::State& state) {
  const TaylorNet net = BenchNet(state.range(1), 2);
  const Matrix z = RandomInputs(state.range(0), net.input_dim, 2);
  const Matrix up = RandomInputs(state.range(0), net.output_dim, 3);
  for (auto _ : state) benchmark::DoNotOptimize(BackwardReference(net, z, up));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

ConceptBank BenchBank(std::size_t concepts) {
  ConceptBank bank;
  std::mt19937_64 rng(4);
  for (std::size_t c = 0; c < concepts; ++c) {
    Concept con;
    con.name = "c" + std::to_string(c);
    con.columns = {3 * c, 3 * c + 1, 3 * c + 2};
    con.encoder = MakeMlpEncoder(3, {64, 64, 32});
    InitMlpEncoder(con.encoder, rng);
    bank.concepts.push_back(std::move(con));
  }
  return bank;
}

void BM_Encode(benchmark::State& state) {
  const ConceptBank bank = BenchBank(state.range(1));
  const Matrix x = RandomInputs(state.range(0), 3 * state.range(1), 5);
  for (auto _ : state) benchmark::DoNotOptimize(Encode(bank, x, EncodeMode::kEval, nullptr).z);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EncodeReference(benchmark::State& state) {
  const ConceptBank bank = BenchBank(state.range(1));
  const Matrix x = RandomInputs(state.range(0), 3 * state.range(1), 5);
  for (auto _ : state) benchmark::DoNotOptimize(EncodeReference(bank, x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

#define CAT_BENCH_ARGS ->Args({256, 2})->Args({1024, 6})->Args({4096, 6})
BENCHMARK(BM_Forward) CAT_BENCH_ARGS;
BENCHMARK(BM_ForwardReference) CAT_BENCH_ARGS;
BENCHMARK(BM_Backward) CAT_BENCH_ARGS;
BENCHMARK(BM_BackwardReference) CAT_BENCH_ARGS;
BENCHMARK(BM_Encode) CAT_BENCH_ARGS;
BENCHMARK(BM_EncodeReference) CAT_BENCH_ARGS;

}  // namespace
}  // namespace cat

BENCHMARK_MAIN();
