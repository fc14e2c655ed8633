// Command line front end for the TCN simulator: paired experiment runs,
// the two scaling sweeps, and offline tangle dump validation.
//
// Exit codes: 0 success, 1 usage or input error, 2 non-convergence.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tcn/experiment.hpp"

using namespace tcn;

namespace {

struct CommonOpts {
    std::string topology = "hier"; // hier | cch
    std::string cch_path;
    int nodes = 60;
    int branching = 3;
    int n_subscribers = 8;
    double initial_mib = 10.0;
    double delta_mib = 2.0;
    double chunk_kib = 50.0;
    std::uint32_t fanout = kDefaultFlicFanout;
    double quorum = 0.5;
    std::string update = "version"; // version | append
    std::uint64_t seed = 1;
    int seeds = 5;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--topology", o.topology, "Topology kind: hier or cch")
        ->check(CLI::IsMember({"hier", "cch"}))
        ->capture_default_str();
    cmd->add_option("--cch-path", o.cch_path, "Router adjacency file for --topology cch");
    cmd->add_option("--nodes", o.nodes, "Node count for the generated topology")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--branching", o.branching, "Tree branching factor")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--n", o.n_subscribers, "Subscriber count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--initial-mb", o.initial_mib, "Initial NDO size in MiB")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--delta-mb", o.delta_mib, "Delta size in MiB")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--chunk-kb", o.chunk_kib, "Chunk size in KiB")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--fanout", o.fanout, "Tree manifest fanout")
        ->check(CLI::Range(2u, 4096u))
        ->capture_default_str();
    cmd->add_option("--quorum", o.quorum, "Consensus quorum fraction")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--update", o.update, "Delta mode: version or append")
        ->check(CLI::IsMember({"version", "append"}))
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "Base random seed")
        ->envname("TCN_SEED")
        ->capture_default_str();
    cmd->add_option("--seeds", o.seeds, "Seed count for sweeps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--out", o.out, "Result CSV path (stdout when omitted)");
}

ExperimentConfig to_config(const CommonOpts& o, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.topo = o.topology == "cch" ? ExperimentConfig::TopoKind::Cch
                                   : ExperimentConfig::TopoKind::Hierarchical;
    cfg.cch_path = o.cch_path;
    cfg.topo_nodes = o.nodes;
    cfg.branching = o.branching;
    cfg.n_subscribers = o.n_subscribers;
    cfg.initial_mib = o.initial_mib;
    cfg.delta_mib = o.delta_mib;
    cfg.chunk_kib = o.chunk_kib;
    cfg.fanout = o.fanout;
    cfg.quorum = o.quorum;
    cfg.update_mode = o.update == "append" ? UpdateMode::Append : UpdateMode::Version;
    cfg.seed = seed;
    return cfg;
}

void emit(const CommonOpts& o, const CsvTable& table) {
    if (o.out.empty())
        std::fputs(render_csv(table).c_str(), stdout);
    else
        write_csv_atomic(o.out, table);
}

const char* arm_name(ManifestMode mode) {
    return mode == ManifestMode::Tangle ? "tangle" : "flic";
}

bool summarize(const RunResult& run) {
    std::fprintf(stderr,
                 "%s seed=%llu n=%d converged=%s mean_delta=%.3fs manifest=%lluB total=%lluB\n",
                 arm_name(run.mode), static_cast<unsigned long long>(run.seed),
                 run.n_subscribers, run.converged ? "yes" : "no", run.mean_delta_sync_s(),
                 static_cast<unsigned long long>(run.manifest_bytes),
                 static_cast<unsigned long long>(run.total_bytes));
    return run.converged;
}

int cmd_run(const CommonOpts& o) {
    ExperimentConfig cfg = to_config(o, o.seed);
    RunPair pair = run_pair(cfg);
    CsvTable table = experiment_csv_header();
    append_run_rows(table, cfg, pair.tangle);
    append_run_rows(table, cfg, pair.flic);
    emit(o, table);
    bool ok = summarize(pair.tangle);
    ok = summarize(pair.flic) && ok;
    return ok ? 0 : 2;
}

int cmd_node_scaling(const CommonOpts& o, const std::vector<int>& counts) {
    CsvTable table = experiment_csv_header();
    bool ok = true;
    for (int n : counts) {
        for (int s = 0; s < o.seeds; ++s) {
            CommonOpts local = o;
            local.n_subscribers = n;
            ExperimentConfig cfg = to_config(local, o.seed + static_cast<std::uint64_t>(s));
            RunPair pair = run_pair(cfg);
            append_run_rows(table, cfg, pair.tangle);
            append_run_rows(table, cfg, pair.flic);
            ok = summarize(pair.tangle) && ok;
            ok = summarize(pair.flic) && ok;
        }
    }
    emit(o, table);
    return ok ? 0 : 2;
}

int cmd_size_scaling(const CommonOpts& o, const std::vector<double>& sizes) {
    CsvTable table = experiment_csv_header();
    bool ok = true;
    std::vector<double> tangle_slopes, flic_slopes;
    for (int s = 0; s < o.seeds; ++s) {
        std::vector<double> tangle_t, flic_t;
        for (double mib : sizes) {
            CommonOpts local = o;
            local.initial_mib = mib;
            ExperimentConfig cfg = to_config(local, o.seed + static_cast<std::uint64_t>(s));
            RunPair pair = run_pair(cfg);
            append_run_rows(table, cfg, pair.tangle);
            append_run_rows(table, cfg, pair.flic);
            ok = summarize(pair.tangle) && ok;
            ok = summarize(pair.flic) && ok;
            tangle_t.push_back(pair.tangle.mean_delta_sync_s());
            flic_t.push_back(pair.flic.mean_delta_sync_s());
        }
        tangle_slopes.push_back(ols_slope(sizes, tangle_t));
        flic_slopes.push_back(ols_slope(sizes, flic_t));
    }
    emit(o, table);
    auto ft = one_sample_t(flic_slopes);
    auto tt = one_sample_t(tangle_slopes);
    std::fprintf(stderr, "flic slope mean=%.5f s/MiB (p>0: %.3e), tangle slope mean=%.5f s/MiB\n",
                 ft.mean, ft.p_greater, tt.mean);
    return ok ? 0 : 2;
}

// Dump format: a sequence of [u32 little-endian length][element encoding].
int cmd_validate(const std::string& path, const std::string& ndo) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "cannot open %s\n", path.c_str());
        return 1;
    }
    TangleGraph graph(ndo);
    std::size_t count = 0;
    while (true) {
        unsigned char lenb[4];
        in.read(reinterpret_cast<char*>(lenb), 4);
        if (in.gcount() == 0) break;
        if (in.gcount() != 4) {
            std::fprintf(stderr, "truncated record header at element %zu\n", count);
            return 1;
        }
        std::uint32_t len = static_cast<std::uint32_t>(lenb[0]) |
                            (static_cast<std::uint32_t>(lenb[1]) << 8) |
                            (static_cast<std::uint32_t>(lenb[2]) << 16) |
                            (static_cast<std::uint32_t>(lenb[3]) << 24);
        std::vector<std::uint8_t> bytes(len);
        in.read(reinterpret_cast<char*>(bytes.data()), len);
        if (in.gcount() != static_cast<std::streamsize>(len)) {
            std::fprintf(stderr, "truncated element %zu\n", count);
            return 1;
        }
        try {
            Element e = decode_element(bytes);
            ElementId id = element_id(e);
            graph.inject_raw(id, std::move(e));
        } catch (const WireError& err) {
            std::fprintf(stderr, "element %zu does not decode: %s\n", count, err.what());
            return 1;
        }
        ++count;
    }
    try {
        graph.validate();
    } catch (const TangleError& err) {
        std::fprintf(stderr, "invalid after %zu elements: %s\n", count, err.what());
        return 1;
    }
    std::printf("ok: %zu elements, %zu tips\n", count, graph.tips().size());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tangle-centric networking simulator"};
    app.set_config("--config", "", "Read options from a key=value file");
    app.require_subcommand(1);

    CommonOpts opts;

    auto* run = app.add_subcommand("run", "One paired tangle/baseline run");
    add_common(run, opts);

    auto* node_scaling =
        app.add_subcommand("node-scaling", "Sweep the subscriber count, seeds paired");
    add_common(node_scaling, opts);
    std::vector<int> counts{2, 4, 8, 16};
    node_scaling->add_option("--counts", counts, "Subscriber counts to sweep")
        ->capture_default_str();

    auto* size_scaling =
        app.add_subcommand("size-scaling", "Sweep the initial NDO size, seeds paired");
    add_common(size_scaling, opts);
    std::vector<double> sizes{1.0, 2.0, 4.0, 8.0};
    size_scaling->add_option("--sizes-mb", sizes, "Initial sizes in MiB to sweep")
        ->capture_default_str();

    auto* validate = app.add_subcommand("validate-tangle", "Validate an element dump");
    std::string input, ndo = "/data/ndo";
    validate->add_option("--input", input, "Element dump file")->required();
    validate->add_option("--ndo", ndo, "NDO name of the dump")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(opts);
        if (node_scaling->parsed()) return cmd_node_scaling(opts, counts);
        if (size_scaling->parsed()) return cmd_size_scaling(opts, sizes);
        if (validate->parsed()) return cmd_validate(input, ndo);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
