#include <doctest.h>

#include "tcn/experiment.hpp"

using namespace tcn;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.topo_nodes = 13;
    cfg.n_subscribers = 2;
    cfg.initial_mib = 0.5;
    cfg.delta_mib = 0.1;
    cfg.chunk_kib = 50.0;
    cfg.seed = 3;
    return cfg;
}

} // namespace

TEST_CASE("chunk stream arithmetic") {
    CHECK(chunk_count(200.0, 50.0) == 4096);
    CHECK(chunk_count(1024.0, 50.0) == 20972);
    CHECK(chunk_count(0.5, 50.0) == 11);

    auto chunks = make_chunks("/d/x", 0.5, 50.0, 1);
    REQUIRE(chunks.size() == 11);
    CHECK(chunks[0].size_bytes == 51200);
    std::uint64_t total = 0;
    for (const auto& c : chunks) total += c.size_bytes;
    CHECK(total == 524288);
    // content version changes the hashes, not the names
    auto v2 = make_chunks("/d/x", 0.5, 50.0, 2);
    CHECK(v2[0].chunk_name == chunks[0].chunk_name);
    CHECK(v2[0].chunk_hash != chunks[0].chunk_hash);
}

TEST_CASE("subscriber picks are deterministic and size-independent") {
    ExperimentConfig cfg = tiny_config();
    Topology topo = make_topology(cfg);
    auto a = pick_subscribers(topo, 0, 4, 9);
    auto b = pick_subscribers(topo, 0, 4, 9);
    CHECK(a == b);
    for (int s : a) CHECK(s != 0);
    auto c = pick_subscribers(topo, 0, 4, 10);
    CHECK(a != c); // different seed, different draw (overwhelmingly likely)
}

TEST_CASE("a tiny paired run converges in both arms") {
    ExperimentConfig cfg = tiny_config();
    RunPair pair = run_pair(cfg);
    CHECK(pair.tangle.converged);
    CHECK(pair.flic.converged);
    for (const auto& s : pair.tangle.subscribers) {
        CHECK(s.completed);
        CHECK(s.delta_sync_s > 0);
        CHECK(s.delta_sync_s < 60);
    }
    CHECK(pair.tangle.manifest_bytes > 0);
    CHECK(pair.flic.manifest_bytes > 0);
    CHECK(pair.tangle.initial_elements == 12);
}

TEST_CASE("identical configuration reproduces identical results") {
    ExperimentConfig cfg = tiny_config();
    RunResult a = run_arm(cfg, ManifestMode::Tangle);
    RunResult b = run_arm(cfg, ManifestMode::Tangle);
    REQUIRE(a.subscribers.size() == b.subscribers.size());
    for (std::size_t i = 0; i < a.subscribers.size(); ++i)
        CHECK(a.subscribers[i].delta_sync_s == b.subscribers[i].delta_sync_s);
    CHECK(a.manifest_bytes == b.manifest_bytes);
    CHECK(a.total_bytes == b.total_bytes);
}

TEST_CASE("slope and t-test helpers") {
    std::vector<double> x{1, 2, 3, 4};
    std::vector<double> y{2.0, 4.1, 5.9, 8.0};
    CHECK(ols_slope(x, y) == doctest::Approx(2.0).epsilon(0.02));

    auto t = one_sample_t({1.0, 1.1, 0.9, 1.05, 0.95});
    CHECK(t.mean == doctest::Approx(1.0));
    CHECK(t.p_greater < 0.001);
    auto z = one_sample_t({-0.1, 0.1, -0.05, 0.05});
    CHECK(z.p_two_sided > 0.5);
}
