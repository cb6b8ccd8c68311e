#include <benchmark/benchmark.h>

#include "esas/cpabe.hpp"
#include "esas/knnse.hpp"
#include "esas/semantic.hpp"

using namespace esas;

namespace {

const cpabe::SetupResult& setup() {
  static SeededRandom rng(1);
  static const auto s = cpabe::system_setup(group::setup_group(128), rng);
  return s;
}

void BM_Pairing(benchmark::State& st) {
  SeededRandom rng(2);
  const auto& g = setup().params.g;
  const auto a = g.pow(group::Scalar::random_nonzero(rng));
  const auto b = g.pow(group::Scalar::random_nonzero(rng));
  for (auto _ : st) benchmark::DoNotOptimize(group::pair(a, b));
}
BENCHMARK(BM_Pairing);

void BM_Encapsulate(benchmark::State& st) {
  SeededRandom rng(3);
  const auto tree = cpabe::parse_policy(st.range(0) == 1 ? "a" : "and(a, or(b, c), 2-of(d, e, f))");
  for (auto _ : st) benchmark::DoNotOptimize(cpabe::encapsulate_key(setup().params, tree, rng));
}
BENCHMARK(BM_Encapsulate)->Arg(1)->Arg(6);

void BM_VerifyAuthorization(benchmark::State& st) {
  SeededRandom rng(4);
  const auto tree = cpabe::parse_policy("and(a, or(b, c), 2-of(d, e, f))");
  const auto ck = cpabe::encapsulate_key(setup().params, tree, rng).ciphertext;
  const auto key = cpabe::user_keygen(setup().params, setup().master, {"a", "b", "d", "e"}, rng);
  for (auto _ : st) benchmark::DoNotOptimize(cpabe::verify_authorization(ck, key));
}
BENCHMARK(BM_VerifyAuthorization);

void BM_Trapdoor(benchmark::State& st) {
  SeededRandom rng(5);
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto key = knnse::owner_keygen(n, rng);
  knnse::PlainVector q{knnse::Vector(n, 0), 0};
  for (std::size_t i = 0; i < n; i += 3) q.values[i] = 1;
  for (auto _ : st) benchmark::DoNotOptimize(knnse::gen_trapdoor(key, q, rng));
}
BENCHMARK(BM_Trapdoor)->Arg(8)->Arg(16)->Arg(32);

void BM_Score(benchmark::State& st) {
  SeededRandom rng(6);
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto key = knnse::owner_keygen(n, rng);
  knnse::PlainVector v{knnse::Vector(n, 0), 0};
  for (std::size_t i = 0; i < n; i += 2) v.values[i] = knnse::Rational(1, 3);
  const auto idx = knnse::encrypt_index(key, v, rng);
  const auto td = knnse::gen_trapdoor(key, v, rng).trapdoor;
  for (auto _ : st) benchmark::DoNotOptimize(knnse::score(idx, td));
}
BENCHMARK(BM_Score)->Arg(8)->Arg(16)->Arg(32);

void BM_Extract(benchmark::State& st) {
  for (auto _ : st) {
    benchmark::DoNotOptimize(semantic::extract_triples(
        "Amy is going to London by train. The doctor treated the patient with antibiotics.",
        semantic::ExtractionMode::AllSentences));
  }
}
BENCHMARK(BM_Extract);

}  // namespace

BENCHMARK_MAIN();
