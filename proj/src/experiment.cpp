#include "tcn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace tcn {

namespace {

constexpr double kMiB = 1024.0 * 1024.0;
constexpr double kKiB = 1024.0;

std::string chunk_name_for(const std::string& ndo, std::uint64_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05llu", static_cast<unsigned long long>(index));
    return ndo + "/chunks/" + buf;
}

} // namespace

std::uint64_t chunk_count(double size_mib, double chunk_kib) {
    std::uint64_t total = static_cast<std::uint64_t>(std::llround(size_mib * kMiB));
    std::uint64_t chunk = static_cast<std::uint64_t>(std::llround(chunk_kib * kKiB));
    if (chunk == 0) throw std::invalid_argument("chunk size must be positive");
    return (total + chunk - 1) / chunk;
}

std::vector<ChunkRef> make_chunks(const std::string& ndo_name, double size_mib,
                                  double chunk_kib, std::uint64_t content_version,
                                  std::uint64_t start_index) {
    std::uint64_t total = static_cast<std::uint64_t>(std::llround(size_mib * kMiB));
    std::uint64_t chunk = static_cast<std::uint64_t>(std::llround(chunk_kib * kKiB));
    std::uint64_t n = chunk_count(size_mib, chunk_kib);
    std::vector<ChunkRef> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        ChunkRef c;
        c.chunk_name = chunk_name_for(ndo_name, start_index + i);
        c.size_bytes = i + 1 < n ? chunk : total - chunk * (n - 1);
        c.chunk_hash = sha256(c.chunk_name + ":v" + std::to_string(content_version));
        out.push_back(std::move(c));
    }
    return out;
}

Topology make_topology(const ExperimentConfig& cfg) {
    if (cfg.topo == ExperimentConfig::TopoKind::Cch) {
        Rng rng(cfg.seed);
        return load_cch(cfg.cch_path, rng);
    }
    return gen_hierarchical_n(cfg.topo_nodes, cfg.branching, cfg.seed);
}

std::vector<int> pick_subscribers(const Topology& topo, int producer, int n,
                                  std::uint64_t seed) {
    std::vector<int> candidates;
    for (int i = 0; i < topo.n_nodes; ++i)
        if (i != producer) candidates.push_back(i);
    if (n > static_cast<int>(candidates.size()))
        throw std::invalid_argument("more subscribers than nodes");
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    for (int i = 0; i < n; ++i) {
        auto j = i + static_cast<int>(uniform_below(rng, candidates.size() - i));
        std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(n);
    std::sort(candidates.begin(), candidates.end());
    return candidates;
}

double RunResult::mean_delta_sync_s() const {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& s : subscribers)
        if (s.completed) {
            sum += s.delta_sync_s;
            ++n;
        }
    return n ? sum / static_cast<double>(n) : 0.0;
}

RunResult run_arm(const ExperimentConfig& cfg, ManifestMode mode) {
    RunResult result;
    result.mode = mode;
    result.seed = cfg.seed;
    result.n_subscribers = cfg.n_subscribers;
    result.initial_chunks = chunk_count(cfg.initial_mib, cfg.chunk_kib);
    result.delta_chunks = chunk_count(cfg.delta_mib, cfg.chunk_kib);
    result.initial_elements = mode == ManifestMode::Tangle ? result.initial_chunks + 1 : 0;

    Topology topo = make_topology(cfg);
    SimWorld world(topo, cfg.seed);
    const int producer = 0;
    world.install_routes_toward(producer, ContentName::parse(cfg.ndo_name));

    SyncConfig sync_cfg = cfg.sync;
    sync_cfg.mode = mode;
    sync_cfg.quorum = cfg.quorum;
    sync_cfg.flic_fanout = cfg.fanout;

    std::vector<int> subs = pick_subscribers(topo, producer, cfg.n_subscribers, cfg.seed);
    result.subscribers.resize(subs.size());
    for (std::size_t i = 0; i < subs.size(); ++i) result.subscribers[i].node_id = subs[i];

    std::vector<std::unique_ptr<SyncEngine>> engines;
    auto prod = std::make_unique<SyncEngine>(world, producer, sync_cfg);
    prod->become_producer(cfg.ndo_name);
    prod->publish_initial(make_chunks(cfg.ndo_name, cfg.initial_mib, cfg.chunk_kib, 1));

    struct Completion {
        double at = -1;
        SimWorld::Traffic traffic_at{};
    };
    std::map<int, Completion> phase2_done;

    std::vector<SyncEngine*> sub_engines;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        auto eng = std::make_unique<SyncEngine>(world, subs[i], sync_cfg);
        SyncEngine* raw = eng.get();
        int node_id = subs[i];
        eng->on_caught_up = [&phase2_done, &world, node_id](const std::string&,
                                                            std::uint64_t version, double now) {
            if (version >= 2 && !phase2_done.count(node_id))
                phase2_done[node_id] = Completion{now, world.traffic()};
        };
        double start_at = 0.01 + 0.001 * static_cast<double>(i);
        std::string ndo = cfg.ndo_name;
        world.schedule_at(start_at, [raw, ndo] { raw->subscribe(ndo); });
        sub_engines.push_back(raw);
        engines.push_back(std::move(eng));
    }

    // Phase 1: everyone bootstrapped and holding a session.
    bool phase1_ok = false;
    while (world.now() < cfg.phase1_limit_s) {
        world.run_until(world.now() + 0.5);
        bool all = true;
        for (auto* e : sub_engines)
            if (e->completed_version() < 1 || e->established_sessions() == 0) all = false;
        if (all) {
            phase1_ok = true;
            break;
        }
    }
    for (std::size_t i = 0; i < sub_engines.size(); ++i)
        result.subscribers[i].bootstrapped = sub_engines[i]->completed_version() >= 1;
    if (!phase1_ok) return result;

    // Let bootstrap-time acknowledgement gossip quiesce so the measurement
    // window holds only update traffic: wait for three consecutive seconds
    // without element, manifest or chunk movement.
    auto settled_bytes = [&world] {
        const auto& t = world.traffic();
        return t.data_bytes[static_cast<int>(PayloadKind::TangleElement)] +
               t.data_bytes[static_cast<int>(PayloadKind::FlicNode)] +
               t.data_bytes[static_cast<int>(PayloadKind::Chunk)];
    };
    int quiet = 0;
    std::uint64_t prev_bytes = settled_bytes();
    while (quiet < 3 && world.now() < cfg.phase1_limit_s) {
        world.run_until(world.now() + 1.0);
        std::uint64_t cur = settled_bytes();
        quiet = cur == prev_bytes ? quiet + 1 : 0;
        prev_bytes = cur;
    }

    // Phase 2: publish the delta and measure each subscriber's catch-up.
    SimWorld::Traffic before = world.traffic();
    result.notify_at = world.now();
    std::vector<ChunkRef> delta =
        cfg.update_mode == UpdateMode::Version
            ? make_chunks(cfg.ndo_name, cfg.delta_mib, cfg.chunk_kib, 2)
            : make_chunks(cfg.ndo_name, cfg.delta_mib, cfg.chunk_kib, 2,
                          result.initial_chunks);
    prod->publish_update(cfg.update_mode, delta);

    double deadline = result.notify_at + cfg.phase2_limit_s;
    while (world.now() < deadline && phase2_done.size() < subs.size())
        world.run_until(world.now() + 0.05);

    SimWorld::Traffic window_end = before;
    double last = result.notify_at;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        auto it = phase2_done.find(subs[i]);
        if (it == phase2_done.end()) continue;
        result.subscribers[i].completed = true;
        result.subscribers[i].delta_sync_s = it->second.at - result.notify_at;
        if (it->second.at >= last) {
            last = it->second.at;
            window_end = it->second.traffic_at;
        }
    }
    result.all_complete_at = last;
    result.converged = phase2_done.size() == subs.size();

    SimWorld::Traffic d = window_end - before;
    result.manifest_bytes = d.manifest_bytes();
    result.chunk_bytes = d.data_bytes[static_cast<int>(PayloadKind::Chunk)];
    result.interest_bytes = d.interest_bytes;
    result.total_bytes = d.data_total() + d.interest_bytes;
    return result;
}

RunPair run_pair(const ExperimentConfig& cfg) {
    RunPair pair;
    pair.tangle = run_arm(cfg, ManifestMode::Tangle);
    pair.flic = run_arm(cfg, ManifestMode::Flic);
    return pair;
}

CsvTable experiment_csv_header() {
    CsvTable t;
    t.header = {"schema",         "arm",           "seed",          "n_subscribers",
                "topo_nodes",     "initial_mib",   "delta_mib",     "chunk_kib",
                "fanout",         "node_id",       "converged",     "delta_sync_s",
                "manifest_bytes", "chunk_bytes",   "interest_bytes", "total_bytes",
                "initial_chunks", "delta_chunks",  "initial_elements", "run_mean_delta_s"};
    return t;
}

void append_run_rows(CsvTable& table, const ExperimentConfig& cfg, const RunResult& run) {
    std::string arm = run.mode == ManifestMode::Tangle ? "tcn" : "flic";
    double mean = run.mean_delta_sync_s();
    for (const auto& s : run.subscribers) {
        table.rows.push_back({kCsvSchemaVersion,
                              arm,
                              std::to_string(run.seed),
                              std::to_string(run.n_subscribers),
                              std::to_string(cfg.topo_nodes),
                              format_double(cfg.initial_mib),
                              format_double(cfg.delta_mib),
                              format_double(cfg.chunk_kib),
                              std::to_string(cfg.fanout),
                              std::to_string(s.node_id),
                              s.completed && run.converged ? "1" : "0",
                              format_double(s.delta_sync_s),
                              std::to_string(run.manifest_bytes),
                              std::to_string(run.chunk_bytes),
                              std::to_string(run.interest_bytes),
                              std::to_string(run.total_bytes),
                              std::to_string(run.initial_chunks),
                              std::to_string(run.delta_chunks),
                              std::to_string(run.initial_elements),
                              format_double(mean)});
    }
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("ols_slope needs paired samples");
    double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0) throw std::invalid_argument("ols_slope: degenerate x");
    return sxy / sxx;
}

TTestResult one_sample_t(const std::vector<double>& samples) {
    TTestResult r;
    r.n = samples.size();
    if (r.n < 2) throw std::invalid_argument("t-test needs at least two samples");
    double n = static_cast<double>(r.n);
    for (double v : samples) r.mean += v;
    r.mean /= n;
    double ss = 0;
    for (double v : samples) ss += (v - r.mean) * (v - r.mean);
    double sd = std::sqrt(ss / (n - 1));
    if (sd == 0) {
        // Degenerate but decisive: every sample equals the mean.
        r.t = r.mean > 0 ? 1e9 : (r.mean < 0 ? -1e9 : 0);
        r.p_two_sided = r.mean == 0 ? 1.0 : 0.0;
        r.p_greater = r.mean > 0 ? 0.0 : 1.0;
        return r;
    }
    r.t = r.mean / (sd / std::sqrt(n));
    boost::math::students_t dist(n - 1);
    double cdf = boost::math::cdf(dist, r.t);
    r.p_greater = 1.0 - cdf;
    r.p_two_sided = 2.0 * std::min(cdf, 1.0 - cdf);
    return r;
}

} // namespace tcn
