#include "tcn/topology.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace tcn {
namespace {

bool is_int_token(const std::string& tok) {
    if (tok.empty())
        return false;
    std::size_t i = (tok[0] == '-' || tok[0] == '+') ? 1 : 0;
    if (i >= tok.size())
        return false;
    for (; i < tok.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(tok[i])))
            return false;
    return true;
}

void sample_bandwidths(Topology& topo, Rng& rng) {
    for (auto& l : topo.links)
        l.bandwidth_Bps = uniform_real(rng, kLinkBandwidthLo, kLinkBandwidthHi);
}

} // namespace

std::vector<std::vector<int>> Topology::adjacency() const {
    std::vector<std::vector<int>> adj(n_nodes);
    for (int i = 0; i < static_cast<int>(links.size()); ++i) {
        adj[links[i].a].push_back(i);
        adj[links[i].b].push_back(i);
    }
    return adj;
}

bool Topology::connected() const {
    if (n_nodes == 0)
        return true;
    auto adj = adjacency();
    std::vector<char> seen(n_nodes, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int li : adj[u]) {
            int v = links[li].a == u ? links[li].b : links[li].a;
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                q.push(v);
            }
        }
    }
    return count == n_nodes;
}

Topology load_cch(const std::string& path, Rng& rng) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open topology file: " + path);

    std::map<long long, int> ids;
    std::set<std::pair<int, int>> edges;
    auto intern = [&](long long raw) {
        auto [it, inserted] = ids.try_emplace(raw, static_cast<int>(ids.size()));
        (void)inserted;
        return it->second;
    };

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        std::istringstream ls(line);
        std::vector<std::string> toks;
        for (std::string t; ls >> t;)
            toks.push_back(t);
        if (toks.empty())
            continue;

        auto arrow = std::find(toks.begin(), toks.end(), "->");
        if (arrow != toks.end()) {
            // cch layout: uid and decorations, then "->", then neighbor uids.
            if (!is_int_token(toks.front()))
                throw ParseError("line " + std::to_string(line_no) + ": bad router id '" +
                                 toks.front() + "'");
            int u = intern(std::stoll(toks.front()));
            for (auto it = arrow + 1; it != toks.end(); ++it) {
                std::string tok = *it;
                if (!tok.empty() && tok[0] == '<' && tok.back() == '>')
                    tok = tok.substr(1, tok.size() - 2);
                if (!is_int_token(tok))
                    continue; // name/decoration tail
                int v = intern(std::stoll(tok));
                if (u != v)
                    edges.insert({std::min(u, v), std::max(u, v)});
            }
        } else {
            // plain adjacency: node followed by zero or more neighbors
            for (const auto& t : toks)
                if (!is_int_token(t))
                    throw ParseError("line " + std::to_string(line_no) + ": bad token '" + t +
                                     "'");
            int u = intern(std::stoll(toks.front()));
            for (std::size_t i = 1; i < toks.size(); ++i) {
                int v = intern(std::stoll(toks[i]));
                if (u != v)
                    edges.insert({std::min(u, v), std::max(u, v)});
            }
        }
    }

    Topology topo;
    topo.n_nodes = static_cast<int>(ids.size());
    for (auto [a, b] : edges)
        topo.links.push_back({a, b, 0, kDefaultLatency});
    sample_bandwidths(topo, rng);
    return topo;
}

namespace {

Topology build_tree(int n_nodes, int branching, std::uint64_t seed) {
    Topology topo;
    topo.n_nodes = n_nodes;
    std::vector<int> level_of(n_nodes, 0);
    for (int child = 1; child < n_nodes; ++child) {
        int parent = (child - 1) / branching;
        topo.links.push_back({parent, child, 0, kDefaultLatency});
        level_of[child] = level_of[parent] + 1;
    }

    // Cross links between same-level nodes; one per four nodes of a level.
    Rng rng(seed);
    std::map<int, std::vector<int>> by_level;
    for (int i = 0; i < n_nodes; ++i)
        by_level[level_of[i]].push_back(i);
    std::set<std::pair<int, int>> have;
    for (const auto& l : topo.links)
        have.insert({std::min(l.a, l.b), std::max(l.a, l.b)});
    for (const auto& [lvl, nodes] : by_level) {
        if (nodes.size() < 2)
            continue;
        std::size_t wanted = nodes.size() / 4;
        for (std::size_t k = 0, attempts = 0; k < wanted && attempts < 16 * wanted; ++attempts) {
            int a = nodes[uniform_below(rng, nodes.size())];
            int b = nodes[uniform_below(rng, nodes.size())];
            if (a == b)
                continue;
            auto key = std::make_pair(std::min(a, b), std::max(a, b));
            if (!have.insert(key).second)
                continue;
            topo.links.push_back({key.first, key.second, 0, kDefaultLatency});
            ++k;
        }
    }
    sample_bandwidths(topo, rng);
    return topo;
}

} // namespace

Topology gen_hierarchical(int levels, int branching, std::uint64_t seed) {
    if (levels < 1 || branching < 1)
        throw std::invalid_argument("gen_hierarchical: levels and branching must be >= 1");
    long long n = 0, width = 1;
    for (int i = 0; i < levels; ++i) {
        n += width;
        width *= branching;
    }
    return build_tree(static_cast<int>(n), branching, seed);
}

Topology gen_hierarchical_n(int n_nodes, int branching, std::uint64_t seed) {
    if (n_nodes < 1 || branching < 1)
        throw std::invalid_argument("gen_hierarchical_n: arguments must be >= 1");
    return build_tree(n_nodes, branching, seed);
}

} // namespace tcn
