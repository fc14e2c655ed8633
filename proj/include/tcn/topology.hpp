#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcn/rng.hpp"

namespace tcn {

struct LinkSpec {
    int a = 0;
    int b = 0;
    double bandwidth_Bps = 0;
    double latency_s = 0.001;
};

struct Topology {
    int n_nodes = 0;
    std::vector<LinkSpec> links;

    bool connected() const;
    std::vector<std::vector<int>> adjacency() const; // node -> link indexes
};

inline constexpr double kLinkBandwidthLo = 2e6;  // 2 MBps
inline constexpr double kLinkBandwidthHi = 10e6; // 10 MBps
inline constexpr double kDefaultLatency = 0.001;

// Rocketfuel-style router adjacency. Plain lines are "<node> <neighbor>...";
// lines containing "->" use the cch layout (decorations skipped). '#' lines
// are comments. Per-link bandwidth is sampled uniformly from [2, 10] MBps
// with the given rng.
Topology load_cch(const std::string& path, Rng& rng);

// Tree of `levels` levels with `branching` children per node, plus random
// same-level cross links.
Topology gen_hierarchical(int levels, int branching, std::uint64_t seed);

// Same construction, filled breadth-first to an exact node count.
Topology gen_hierarchical_n(int n_nodes, int branching, std::uint64_t seed);

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace tcn
