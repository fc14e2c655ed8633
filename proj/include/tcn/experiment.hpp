#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcn/csv.hpp"
#include "tcn/sync.hpp"
#include "tcn/topology.hpp"

namespace tcn {

// One delta-synchronization run: a producer publishes an initial NDO, n
// subscribers bootstrap, then a delta is published and the per-subscriber
// catch-up time and traffic are measured by the (omniscient) harness.
struct ExperimentConfig {
    std::string ndo_name = "/data/ndo";

    enum class TopoKind { Hierarchical, Cch };
    TopoKind topo = TopoKind::Hierarchical;
    std::string cch_path;
    int topo_nodes = 60;
    int branching = 3;

    int n_subscribers = 8;
    double initial_mib = 10.0;
    double delta_mib = 2.0;
    double chunk_kib = 50.0;
    std::uint32_t fanout = kDefaultFlicFanout;
    double quorum = 0.5;
    std::uint64_t seed = 1;
    UpdateMode update_mode = UpdateMode::Version;

    double phase1_limit_s = 900.0;
    double phase2_limit_s = 120.0;

    SyncConfig sync; // per-arm mode is filled in by the runner
};

std::uint64_t chunk_count(double size_mib, double chunk_kib);
// Deterministic chunk stream: names <ndo>/chunks/<index>, content hashes
// derived from name and content version.
std::vector<ChunkRef> make_chunks(const std::string& ndo_name, double size_mib,
                                  double chunk_kib, std::uint64_t content_version,
                                  std::uint64_t start_index = 0);

struct SubscriberResult {
    int node_id = -1;
    bool bootstrapped = false;
    bool completed = false;
    double delta_sync_s = 0;
};

struct RunResult {
    ManifestMode mode{};
    std::uint64_t seed = 0;
    int n_subscribers = 0;
    bool converged = false;
    double notify_at = 0;
    double all_complete_at = 0;
    std::vector<SubscriberResult> subscribers;

    // Traffic inside the measurement window (notify to last completion).
    std::uint64_t manifest_bytes = 0;
    std::uint64_t chunk_bytes = 0;
    std::uint64_t interest_bytes = 0;
    std::uint64_t total_bytes = 0;

    std::uint64_t initial_chunks = 0;
    std::uint64_t delta_chunks = 0;
    std::uint64_t initial_elements = 0; // tangle arm: genesis anchor + cores

    double mean_delta_sync_s() const;
};

Topology make_topology(const ExperimentConfig& cfg);
// Depends only on (topology, seed, n), never on sizes or arm, so runs pair
// across arms and sizes.
std::vector<int> pick_subscribers(const Topology& topo, int producer, int n,
                                  std::uint64_t seed);

RunResult run_arm(const ExperimentConfig& cfg, ManifestMode mode);

struct RunPair {
    RunResult tangle;
    RunResult flic;
};
// Both arms over identical topology, seed, subscriber set and chunk stream.
RunPair run_pair(const ExperimentConfig& cfg);

CsvTable experiment_csv_header();
void append_run_rows(CsvTable& table, const ExperimentConfig& cfg, const RunResult& run);

// Least squares slope of y over x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

struct TTestResult {
    double t = 0;
    double p_two_sided = 1;
    double p_greater = 1; // H1: mean > 0
    double mean = 0;
    std::size_t n = 0;
};
// One-sample t-test against mean zero.
TTestResult one_sample_t(const std::vector<double>& samples);

} // namespace tcn
