// Acceptance harness: one pass/fail line per criterion, exit code equals
// the number of failed criteria.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "tcn/experiment.hpp"
#include "tcn/sync.hpp"

using namespace tcn;

namespace {

int g_failures = 0;

void report(int index, const std::string& title, bool ok, const std::string& detail) {
    std::printf("%s: C%d %s (%s)\n", ok ? "PASS" : "FAIL", index, title.c_str(),
                detail.c_str());
    if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

// --- criterion 1: update sync time by subscriber count ---------------------

void criterion_node_scaling() {
    bool ok = true;
    std::string detail;
    for (int n : {2, 4, 8, 16}) {
        ExperimentConfig cfg;
        cfg.topo_nodes = 40;
        cfg.n_subscribers = n;
        cfg.initial_mib = 4.0;
        cfg.delta_mib = 0.5;
        cfg.chunk_kib = 10.0;
        cfg.seed = 42 + static_cast<std::uint64_t>(n);
        RunPair pair = run_pair(cfg);
        double t = pair.tangle.mean_delta_sync_s();
        double f = pair.flic.mean_delta_sync_s();
        bool here = pair.tangle.converged && pair.flic.converged && t < f && t < 120.0 &&
                    f < 120.0;
        ok = ok && here;
        detail += fmt("n=%d tangle=%.3fs flic=%.3fs%s ", n, t, f, here ? "" : "!");
    }
    report(1, "delta sync faster than the baseline at every subscriber count", ok, detail);
}

// --- criterion 2: update sync time by NDO size -----------------------------

void criterion_size_scaling() {
    const std::vector<double> sizes{1.0, 2.0, 4.0, 8.0};
    const std::vector<std::uint64_t> seeds{11, 12, 13, 14, 15};
    std::vector<double> flic_slopes, tangle_slopes;
    for (std::uint64_t seed : seeds) {
        std::vector<double> tangle_t, flic_t;
        for (double mib : sizes) {
            ExperimentConfig cfg;
            cfg.topo_nodes = 25;
            cfg.n_subscribers = 4;
            cfg.initial_mib = mib;
            cfg.delta_mib = 0.25;
            cfg.chunk_kib = 10.0;
            cfg.seed = seed;
            RunPair pair = run_pair(cfg);
            tangle_t.push_back(pair.tangle.mean_delta_sync_s());
            flic_t.push_back(pair.flic.mean_delta_sync_s());
        }
        tangle_slopes.push_back(ols_slope(sizes, tangle_t));
        flic_slopes.push_back(ols_slope(sizes, flic_t));
    }
    auto flic_test = one_sample_t(flic_slopes);
    double tangle_mean = 0, flic_mean = 0;
    for (double s : tangle_slopes) tangle_mean += std::fabs(s);
    for (double s : flic_slopes) flic_mean += s;
    tangle_mean /= static_cast<double>(tangle_slopes.size());
    flic_mean /= static_cast<double>(flic_slopes.size());

    bool ok = flic_test.p_greater < 0.01 && flic_mean > 0 &&
              tangle_mean <= 0.10 * flic_mean;
    report(2, "baseline delta time grows with NDO size, delta sync stays flat", ok,
           fmt("flic slope=%.4fs/MiB p=%.2e, |tangle slope|=%.4fs/MiB", flic_mean,
               flic_test.p_greater, tangle_mean));
}

// --- criterion 3: manifest bytes in the update window ----------------------

void criterion_manifest_bytes() {
    ExperimentConfig cfg;
    cfg.topo_nodes = 40;
    cfg.n_subscribers = 6;
    cfg.initial_mib = 8.0;
    cfg.delta_mib = 0.5;
    cfg.chunk_kib = 10.0;
    cfg.seed = 5;
    RunPair pair = run_pair(cfg);
    double ratio = pair.flic.manifest_bytes == 0
                       ? 1.0
                       : static_cast<double>(pair.tangle.manifest_bytes) /
                             static_cast<double>(pair.flic.manifest_bytes);
    bool ok = pair.tangle.converged && pair.flic.converged && ratio < 0.25;
    report(3, "update-window manifest traffic under a quarter of the baseline", ok,
           fmt("tangle=%lluB flic=%lluB ratio=%.3f",
               static_cast<unsigned long long>(pair.tangle.manifest_bytes),
               static_cast<unsigned long long>(pair.flic.manifest_bytes), ratio));
}

// --- criterion 4: parameter echoes -----------------------------------------

void criterion_parameter_echoes() {
    std::uint64_t chunks_200 = chunk_count(200.0, 50.0);
    std::uint64_t elements_1g = chunk_count(1024.0, 50.0) + 1; // plus genesis anchor
    bool ok = chunks_200 == 4096 && elements_1g == 20973;
    report(4, "200 MiB NDO splits into 4096 chunks, 1 GiB NDO carries 20973 elements", ok,
           fmt("chunks=%llu elements=%llu", static_cast<unsigned long long>(chunks_200),
               static_cast<unsigned long long>(elements_1g)));
}

// --- criterion 5: DAG properties vs brute-force oracles --------------------

struct DagOracles {
    static std::pair<std::optional<ElementId>, std::optional<ElementId>> refs(const Element& e) {
        if (const auto* core = std::get_if<CoreElement>(&e))
            return {core->primary_ref, core->secondary_ref};
        const auto& ack = std::get<AckElement>(e);
        return {ack.acked_ref, ack.random_ref};
    }

    static std::set<ElementId> tips(const TangleGraph& g) {
        std::set<ElementId> out(g.insertion_order().begin(), g.insertion_order().end());
        for (const auto& id : g.insertion_order()) {
            auto [r1, r2] = refs(g.element(id));
            if (r1) out.erase(*r1);
            if (r2) out.erase(*r2);
        }
        return out;
    }

    static std::size_t degree(const TangleGraph& g, const ElementId& target) {
        std::set<std::string> origins;
        for (const auto& id : g.insertion_order()) {
            const auto* ack = std::get_if<AckElement>(&g.element(id));
            if (ack && ack->acked_ref == target) origins.insert(ack->origin);
        }
        return origins.size();
    }

    static std::vector<ChunkRef> resolve(const TangleGraph& g, const VersionSelector& sel) {
        std::vector<std::string> order;
        std::map<std::string, std::map<std::uint64_t, ChunkRef>> vers;
        for (const auto& id : g.insertion_order()) {
            const auto* core = std::get_if<CoreElement>(&g.element(id));
            if (!core) continue;
            if (!vers.count(core->chunk.chunk_name)) order.push_back(core->chunk.chunk_name);
            vers[core->chunk.chunk_name][core->version] = core->chunk;
        }
        std::vector<ChunkRef> out;
        for (const auto& name : order) {
            const auto& m = vers.at(name);
            std::optional<ChunkRef> pick;
            if (sel.kind == VersionSelector::Kind::Latest) {
                pick = m.rbegin()->second;
            } else if (sel.kind == VersionSelector::Kind::Initial) {
                auto it = m.find(0);
                if (it != m.end()) pick = it->second;
            } else {
                for (const auto& [v, c] : m)
                    if (v <= static_cast<std::uint64_t>(sel.k)) pick = c;
            }
            if (pick) out.push_back(*pick);
        }
        return out;
    }

    static std::set<ElementId> reachable(const TangleGraph& g, const std::set<ElementId>& from) {
        std::set<ElementId> seen;
        std::vector<ElementId> stack(from.begin(), from.end());
        while (!stack.empty()) {
            ElementId id = stack.back();
            stack.pop_back();
            if (!seen.insert(id).second) continue;
            auto [r1, r2] = refs(g.element(id));
            if (r1) stack.push_back(*r1);
            if (r2) stack.push_back(*r2);
        }
        return seen;
    }
};

void criterion_dag_properties() {
    const int kSequences = 10000;
    int bad = 0;
    for (int s = 0; s < kSequences && bad == 0; ++s) {
        Rng rng(1000003ull * static_cast<std::uint64_t>(s) + 17);
        TangleGraph g = TangleGraph::genesis(
            "/t/ndo", ChunkRef{"/t/ndo/genesis", sha256(std::string_view("")), 0}, "n0");
        std::vector<std::string> names{"/t/ndo/genesis"};
        std::vector<std::string> origins{"n0", "n1", "n2", "n3", "n4"};
        int ops = 6 + static_cast<int>(uniform_below(rng, 10));
        for (int i = 0; i < ops; ++i) {
            const std::string& who = origins[uniform_below(rng, origins.size())];
            switch (uniform_below(rng, 3)) {
            case 0: {
                std::string nm = "/t/ndo/c" + std::to_string(names.size());
                ChunkRef c{nm, sha256(std::string_view(nm)), 1000};
                g.append_core(c, *g.latest_core(), who, rng);
                names.push_back(nm);
                break;
            }
            case 1: {
                const std::string& nm = names[uniform_below(rng, names.size())];
                ChunkRef c{nm, sha256(nm + "@" + std::to_string(i)), 1000};
                g.append_version(nm, c, who, rng);
                break;
            }
            default: {
                std::vector<ElementId> cores;
                for (const auto& id : g.insertion_order())
                    if (is_core(g.element(id))) cores.push_back(id);
                g.append_ack(cores[uniform_below(rng, cores.size())], who, rng);
                break;
            }
            }
        }

        try {
            g.validate();
        } catch (const TangleError&) {
            ++bad;
            break;
        }
        if (g.tips() != DagOracles::tips(g)) ++bad;
        for (const auto& id : g.insertion_order())
            if (g.verification_degree(id) != DagOracles::degree(g, id)) ++bad;
        for (const auto& sel : {VersionSelector::latest(), VersionSelector::initial(),
                                VersionSelector::exact(static_cast<std::int64_t>(
                                    uniform_below(rng, 4)))}) {
            auto got = g.resolve_version(sel);
            auto want = DagOracles::resolve(g, sel);
            if (got.size() != want.size()) {
                ++bad;
                continue;
            }
            for (std::size_t i = 0; i < got.size(); ++i)
                if (!(got[i] == want[i])) ++bad;
        }
        auto trav = g.traverse_backward(g.tips());
        auto reach = DagOracles::reachable(g, g.tips());
        if (trav.size() != reach.size()) ++bad;
        std::set<ElementId> unique(trav.begin(), trav.end());
        if (unique != reach) ++bad;
        if (!trav.empty() && trav.back() != g.insertion_order()[0]) ++bad;
    }
    report(5, "DAG invariants match brute-force oracles over 10000 random sequences",
           bad == 0, fmt("sequences=%d mismatches=%d", kSequences, bad));
}

// --- criterion 6: convergence under churn ----------------------------------

bool churn_scenario(std::uint64_t seed) {
    Topology topo = gen_hierarchical_n(20, 3, seed);
    SyncConfig scfg;
    scfg.heartbeat_interval_s = 1.0;
    scfg.route_ttl_s = 3.0;
    SimWorld world(topo, seed);
    const std::string ndo = "/data/ndo";
    world.install_routes_toward(0, ContentName::parse(ndo));

    SyncEngine producer(world, 0, scfg);
    auto subs = pick_subscribers(topo, 0, 2, seed * 31 + 7);
    std::vector<std::unique_ptr<SyncEngine>> subscribers;
    for (int s : subs) subscribers.push_back(std::make_unique<SyncEngine>(world, s, scfg));

    producer.become_producer(ndo);
    producer.publish_initial(make_chunks(ndo, 2 * 50.0 / 1024.0, 50.0, 1));
    for (auto& e : subscribers) e->subscribe(ndo);
    world.run_until(30.0);
    for (auto& e : subscribers)
        if (e->completed_version() < 1) return false;

    // churn: one random link down and one subscriber offline, then heal
    Rng rng(seed ^ 0xabcdef);
    int link = static_cast<int>(uniform_below(rng, topo.links.size()));
    int victim = subs[uniform_below(rng, subs.size())];
    world.schedule_at(30.0, [&world, link] { world.set_link_up(link, false); });
    world.schedule_at(31.0, [&world, victim] { world.set_node_online(victim, false); });
    world.schedule_at(42.0, [&world, link, victim] {
        world.set_link_up(link, true);
        world.set_node_online(victim, true);
    });
    world.run_until(45.0);

    producer.publish_update(UpdateMode::Version, make_chunks(ndo, 50.0 / 1024.0, 50.0, 2));
    double deadline = 600.0;
    while (world.now() < deadline) {
        world.run_until(world.now() + 5.0);
        bool done = true;
        for (auto& e : subscribers)
            if (e->completed_version() < 2) done = false;
        if (done) return true;
    }
    return false;
}

void criterion_convergence() {
    int failed = 0;
    for (std::uint64_t s = 1; s <= 100; ++s)
        if (!churn_scenario(s)) ++failed;
    report(6, "all 100 churn and partition scenarios reconverge", failed == 0,
           fmt("failed=%d/100", failed));
}

// --- criterion 7: determinism ----------------------------------------------

void criterion_determinism() {
    ExperimentConfig cfg;
    cfg.topo_nodes = 13;
    cfg.n_subscribers = 2;
    cfg.initial_mib = 0.5;
    cfg.delta_mib = 0.1;
    cfg.seed = 3;

    std::vector<std::string> renders;
    for (int rep = 0; rep < 5; ++rep) {
        RunPair pair = run_pair(cfg);
        CsvTable table = experiment_csv_header();
        append_run_rows(table, cfg, pair.tangle);
        append_run_rows(table, cfg, pair.flic);
        renders.push_back(render_csv(table));
    }
    bool ok = true;
    for (const auto& r : renders) ok = ok && r == renders[0];
    report(7, "five repeat runs render byte-identical result tables", ok,
           fmt("runs=5 identical=%s", ok ? "yes" : "no"));
}

// --- criterion 8: handshake and route lifetime -----------------------------

void criterion_handshake() {
    Topology topo;
    topo.n_nodes = 3; // chain: producer 0 - relay 1 - subscriber 2
    topo.links.push_back({0, 1, 5e6, 0.001});
    topo.links.push_back({1, 2, 5e6, 0.001});

    SyncConfig scfg;
    scfg.heartbeat_interval_s = 0.5;
    scfg.route_ttl_s = 1.5;
    Forwarder::Config fcfg;
    fcfg.sync_route_ttl_s = scfg.route_ttl_s;
    SimWorld world(topo, 2, fcfg);
    const std::string ndo = "/data/ndo";
    world.install_routes_toward(0, ContentName::parse(ndo));
    SyncEngine producer(world, 0, scfg);
    SyncEngine subscriber(world, 2, scfg);

    producer.become_producer(ndo);
    producer.publish_initial(make_chunks(ndo, 2 * 50.0 / 1024.0, 50.0, 1));
    subscriber.subscribe(ndo);
    world.run_until(5.0);

    bool ok = subscriber.status() == SyncStatus::Synced &&
              subscriber.established_sessions() == 1 &&
              subscriber.stats().handshakes_completed >= 1;

    // the relay holds confirmed (non-provisional) tunnel routes for both
    // directions of the session
    int relay_tunnels = 0;
    bool any_provisional = false;
    for (const auto& e : world.node(1).fwd().fib()) {
        auto t = parse_sync_tunnel_name(e.prefix);
        if (!t || !t->verb.empty()) continue;
        ++relay_tunnels;
        any_provisional = any_provisional || e.provisional;
        ok = ok && e.expires_at > world.now();
    }
    ok = ok && relay_tunnels >= 2 && !any_provisional;

    // heartbeats keep the routes alive well past the plain TTL
    world.run_until(5.0 + 4 * scfg.route_ttl_s);
    int alive = 0;
    for (const auto& e : world.node(1).fwd().fib())
        if (parse_sync_tunnel_name(e.prefix) && e.expires_at > world.now()) ++alive;
    ok = ok && alive >= 2 && subscriber.established_sessions() == 1;

    // severing the subscriber link drops the session after the miss limit;
    // offline status follows once enough tip polls fail in a row
    world.set_link_up(1, false);
    double cut_at = world.now();
    world.run_until(cut_at + 8.0);
    ok = ok && subscriber.established_sessions() == 0 &&
         subscriber.stats().sessions_dropped >= 1 &&
         subscriber.status() == SyncStatus::Offline;

    // and the relay's tunnel routes decay without renewal
    world.run_until(cut_at + 3 * scfg.route_ttl_s);
    world.node(1).fwd().expire_routes(world.now());
    int stale = 0;
    for (const auto& e : world.node(1).fwd().fib())
        if (parse_sync_tunnel_name(e.prefix)) ++stale;
    ok = ok && stale == 0;

    report(8, "three-way handshake, heartbeat renewal and route expiry behave", ok,
           fmt("relay tunnels=%d alive after ttl x4=%d stale after cut=%d", relay_tunnels,
               alive, stale));
}

} // namespace

int main() {
    criterion_node_scaling();
    criterion_size_scaling();
    criterion_manifest_bytes();
    criterion_parameter_echoes();
    criterion_dag_properties();
    criterion_convergence();
    criterion_determinism();
    criterion_handshake();
    return g_failures;
}
