#include <benchmark/benchmark.h>

#include <string>

#include "wsnsec/auth/merkle.hpp"
#include "wsnsec/auth/mutesla.hpp"
#include "wsnsec/auth/snep.hpp"
#include "wsnsec/harness/run.hpp"

using namespace wsnsec;

namespace {

crypto::Key key_of(std::uint8_t fill) {
    crypto::Key k;
    k.bytes.fill(fill);
    return k;
}

void BM_Hash(benchmark::State& state) {
    const Bytes input(static_cast<std::size_t>(state.range(0)), 0xab);
    for (auto _ : state) benchmark::DoNotOptimize(crypto::hash(input));
    state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Hash)->Arg(16)->Arg(64)->Arg(1024);

void BM_ChainGenerate(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(auth::generate_chain(key_of(1), static_cast<std::uint32_t>(state.range(0))));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ChainGenerate)->Arg(64)->Arg(1024);

void BM_DisclosureAfterGap(benchmark::State& state) {
    const auto gap = static_cast<std::uint32_t>(state.range(0));
    const auto chain = auth::generate_chain(key_of(2), gap + 1);
    for (auto _ : state) {
        auth::ReceiverAuthState rx(chain.commitment(), chain.params(), 1);
        benchmark::DoNotOptimize(rx.receiver_verify_disclosure({gap, chain.key(gap)}));
    }
}
BENCHMARK(BM_DisclosureAfterGap)->Arg(1)->Arg(16)->Arg(256);

void BM_SnepRoundtrip(benchmark::State& state) {
    auto a = auth::make_session(NodeId{1}, NodeId{2}, key_of(3));
    auto b = auth::make_session(NodeId{2}, NodeId{1}, key_of(3));
    const Bytes payload(static_cast<std::size_t>(state.range(0)), 0x42);
    for (auto _ : state) benchmark::DoNotOptimize(auth::snep_receive(b, auth::snep_send(a, payload)));
}
BENCHMARK(BM_SnepRoundtrip)->Arg(32)->Arg(256);

auth::MerkleTree tree_of(std::size_t n) {
    std::vector<auth::DirectoryEntry> entries;
    for (std::size_t i = 0; i < n; ++i) entries.push_back({NodeId{static_cast<std::uint32_t>(i)}, Bytes(32, static_cast<std::uint8_t>(i))});
    return auth::build_tree(auth::KeyDirectory(std::move(entries)));
}

void BM_MerkleBuild(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(tree_of(static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_MerkleBuild)->Arg(64)->Arg(1024);

void BM_MerkleVerify(benchmark::State& state) {
    const auto tree = tree_of(static_cast<std::size_t>(state.range(0)));
    const auto path = auth::prove(tree, NodeId{0});
    const Bytes pk(32, 0);
    for (auto _ : state) benchmark::DoNotOptimize(auth::verify(tree.root(), NodeId{0}, pk, path));
}
BENCHMARK(BM_MerkleVerify)->Arg(64)->Arg(1024);

void BM_ScenarioRun(benchmark::State& state, const std::string& file) {
    const auto scenario = harness::load_scenario(std::string(WSNSEC_SCENARIO_DIR) + "/" + file);
    for (auto _ : state) benchmark::DoNotOptimize(harness::run(scenario));
}
BENCHMARK_CAPTURE(BM_ScenarioRun, strip_nms, std::string("strip_two_droppers.json"))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ScenarioRun, grid_secure_stack, std::string("grid_secure_stack.json"))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ScenarioRun, grayhole_dri, std::string("dri_grayhole_sweep.json"))->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
