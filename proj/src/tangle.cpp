#include "tcn/tangle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>

namespace tcn {

namespace {

[[noreturn]] void corrupt(const std::string& reason) {
    throw TangleError(TangleErrc::CorruptGraph, "corrupt graph: " + reason);
}

std::pair<std::optional<ElementId>, std::optional<ElementId>> refs_of(const Element& e) {
    if (const auto* core = std::get_if<CoreElement>(&e))
        return {core->primary_ref, core->secondary_ref};
    const auto& ack = std::get<AckElement>(e);
    return {ack.acked_ref, ack.random_ref};
}

} // namespace

TangleGraph::TangleGraph(std::string ndo_name, const SignatureScheme& scheme)
    : ndo_name_(std::move(ndo_name)), scheme_(&scheme) {}

TangleGraph TangleGraph::genesis(std::string ndo_name, const ChunkRef& first_chunk,
                                 const std::string& origin, const SignatureScheme& scheme) {
    if (first_chunk.chunk_name.empty())
        throw TangleError(TangleErrc::InvalidChunk, "genesis chunk has empty name");
    TangleGraph g(std::move(ndo_name), scheme);
    CoreElement core;
    core.ndo_name = g.ndo_name_;
    core.chunk = first_chunk;
    core.version = 0;
    core.origin = origin;
    Element e = std::move(core);
    sign_element(e, scheme);
    g.insert(std::move(e));
    return g;
}

const Element& TangleGraph::element(const ElementId& id) const {
    auto it = elements_.find(id);
    if (it == elements_.end())
        throw TangleError(TangleErrc::MissingReference, "unknown element id");
    return it->second.element;
}

ElementId TangleGraph::pick_random_other(const ElementId& excluded, Rng& rng) const {
    // Uniform over all elements except `excluded`.
    auto idx = uniform_below(rng, order_.size() - 1);
    const ElementId& candidate = order_[idx];
    return candidate == excluded ? order_.back() : candidate;
}

ElementId TangleGraph::append_core(const ChunkRef& chunk, const ElementId& primary_target,
                                   const std::string& origin, Rng& rng) {
    auto it = elements_.find(primary_target);
    if (it == elements_.end())
        throw TangleError(TangleErrc::MissingReference, "append_core: unknown primary target");
    if (!is_core(it->second.element))
        throw TangleError(TangleErrc::InvalidTarget, "append_core: primary target is not core");
    if (chunk.chunk_name.empty())
        throw TangleError(TangleErrc::InvalidChunk, "append_core: empty chunk name");

    CoreElement core;
    core.ndo_name = ndo_name_;
    core.chunk = chunk;
    core.version = 0;
    core.primary_ref = primary_target;
    core.secondary_ref =
        elements_.size() == 1 ? primary_target : pick_random_other(primary_target, rng);
    core.origin = origin;
    Element e = std::move(core);
    sign_element(e, *scheme_);
    return insert(std::move(e));
}

ElementId TangleGraph::append_version(const std::string& chunk_name, const ChunkRef& new_chunk,
                                      const std::string& origin, Rng& rng) {
    auto vit = versions_.find(chunk_name);
    if (vit == versions_.end() || vit->second.empty())
        throw TangleError(TangleErrc::UnknownChunk,
                          "append_version: chunk never seen: " + chunk_name);
    if (new_chunk.chunk_name.empty())
        throw TangleError(TangleErrc::InvalidChunk, "append_version: empty chunk name");
    auto [prev_version, prev_id] = *vit->second.rbegin();

    CoreElement core;
    core.ndo_name = ndo_name_;
    core.chunk = new_chunk;
    core.chunk.chunk_name = chunk_name;
    core.version = prev_version + 1;
    core.primary_ref = prev_id;
    core.secondary_ref = elements_.size() == 1 ? prev_id : pick_random_other(prev_id, rng);
    core.origin = origin;
    Element e = std::move(core);
    sign_element(e, *scheme_);
    return insert(std::move(e));
}

std::optional<ElementId> TangleGraph::append_ack(const ElementId& target,
                                                 const std::string& origin, Rng& rng) {
    auto it = elements_.find(target);
    if (it == elements_.end())
        throw TangleError(TangleErrc::MissingReference, "append_ack: unknown target");
    if (!is_core(it->second.element))
        throw TangleError(TangleErrc::InvalidTarget, "append_ack: acks target cores only");
    auto ao = ack_origins_.find(target);
    if (ao != ack_origins_.end() && ao->second.count(origin)) return std::nullopt;
    // Need a distinct random reference; impossible on a one-element graph.
    if (elements_.size() < 2) return std::nullopt;

    AckElement ack;
    ack.ndo_name = ndo_name_;
    ack.acked_ref = target;
    ack.random_ref = pick_random_other(target, rng);
    ack.origin = origin;
    Element e = std::move(ack);
    sign_element(e, *scheme_);
    return insert(std::move(e));
}

ElementId TangleGraph::insert(Element e) { return insert_checked(std::move(e)); }

ElementId TangleGraph::insert_checked(Element e) {
    ElementId id = element_id(e);
    auto existing = elements_.find(id);
    if (existing != elements_.end()) {
        if (!(existing->second.element == e)) corrupt("element id collision");
        return id; // idempotent
    }
    if (ndo_name_of(e) != ndo_name_)
        throw TangleError(TangleErrc::InvalidTarget, "element belongs to a different NDO");
    if (!verify_element_signature(e, *scheme_))
        corrupt("bad-signature");

    auto [r1, r2] = refs_of(e);
    if (const auto* core = std::get_if<CoreElement>(&e)) {
        if (core->chunk.chunk_name.empty())
            throw TangleError(TangleErrc::InvalidChunk, "core element with empty chunk name");
        if (!r1 && !r2) {
            if (!elements_.empty())
                corrupt("second genesis element");
        } else {
            if (!r1 || !r2) corrupt("non-genesis element missing a reference");
            if (!ref_resolves(*r1, true) || !ref_resolves(*r2, true))
                corrupt("dangling-reference");
            if (*r1 == *r2) {
                // Allowed only when both point at the genesis element.
                auto git = elements_.find(*r1);
                bool points_at_genesis = false;
                if (git != elements_.end()) {
                    auto [g1, g2] = refs_of(git->second.element);
                    points_at_genesis = !g1 && !g2;
                }
                if (!points_at_genesis) corrupt("primary equals secondary reference");
            }
        }
    } else {
        const auto& ack = std::get<AckElement>(e);
        if (ack.acked_ref == ack.random_ref) corrupt("ack references itself twice");
        if (!ref_resolves(ack.acked_ref, true) || !ref_resolves(ack.random_ref, true))
            corrupt("dangling-reference");
        auto tit = elements_.find(ack.acked_ref);
        if (tit != elements_.end() && !is_core(tit->second.element))
            throw TangleError(TangleErrc::InvalidTarget, "ack targets an ack element");
        auto ao = ack_origins_.find(ack.acked_ref);
        if (ao != ack_origins_.end() && ao->second.count(ack.origin))
            corrupt("duplicate-ack");
    }

    index_element(id, e);
    elements_.emplace(id, Stored{std::move(e), static_cast<std::uint64_t>(next_index_++)});
    return id;
}

void TangleGraph::inject_raw(const ElementId& claimed_id, Element e) {
    index_element(claimed_id, e);
    elements_.emplace(claimed_id, Stored{std::move(e), static_cast<std::uint64_t>(next_index_++)});
}

void TangleGraph::index_element(const ElementId& id, const Element& e) {
    order_.push_back(id);
    tips_.insert(id);
    auto [r1, r2] = refs_of(e);
    for (const auto& r : {r1, r2}) {
        if (!r) continue;
        incoming_[*r].insert(id);
        tips_.erase(*r);
    }
    if (const auto* core = std::get_if<CoreElement>(&e)) {
        versions_[core->chunk.chunk_name][core->version] = id;
    } else {
        const auto& ack = std::get<AckElement>(e);
        ack_origins_[ack.acked_ref].insert(ack.origin);
    }
}

bool TangleGraph::ref_resolves(const ElementId& id, bool pruned_tolerant) const {
    return elements_.count(id) != 0 || (pruned_tolerant && pruned_.count(id) != 0);
}

std::set<ElementId> TangleGraph::merge_tips(const std::set<ElementId>& local,
                                            const std::set<ElementId>& remote) {
    std::set<ElementId> out = local;
    out.insert(remote.begin(), remote.end());
    return out;
}

std::size_t TangleGraph::verification_degree(const ElementId& id) const {
    if (!elements_.count(id))
        throw TangleError(TangleErrc::MissingReference, "verification_degree: unknown id");
    auto it = ack_origins_.find(id);
    return it == ack_origins_.end() ? 0 : it->second.size();
}

bool TangleGraph::consensus_reached(const ElementId& id, std::size_t n_sync_nodes,
                                    double quorum_fraction) const {
    if (n_sync_nodes < 1) throw std::invalid_argument("consensus: n_sync_nodes must be >= 1");
    if (!(quorum_fraction > 0.0 && quorum_fraction <= 1.0))
        throw std::invalid_argument("consensus: quorum_fraction out of (0, 1]");
    auto needed = static_cast<std::size_t>(
        std::ceil(quorum_fraction * static_cast<double>(n_sync_nodes) - 1e-9));
    return verification_degree(id) >= needed;
}

std::vector<ElementId> TangleGraph::traverse_backward(const std::set<ElementId>& from) const {
    // Frontier ordered by descending insertion index; every reachable
    // element appears exactly once, genesis last.
    std::set<std::pair<std::uint64_t, ElementId>> frontier;
    std::set<ElementId> seen;
    for (const auto& id : from) {
        auto it = elements_.find(id);
        if (it == elements_.end())
            throw TangleError(TangleErrc::MissingReference, "traverse_backward: unknown start id");
        if (seen.insert(id).second) frontier.emplace(it->second.index, id);
    }
    std::vector<ElementId> out;
    while (!frontier.empty()) {
        auto top = *frontier.rbegin();
        frontier.erase(std::prev(frontier.end()));
        out.push_back(top.second);
        auto [r1, r2] = refs_of(elements_.at(top.second).element);
        for (const auto& r : {r1, r2}) {
            if (!r || seen.count(*r)) continue;
            if (pruned_.count(*r)) continue;
            auto it = elements_.find(*r);
            if (it == elements_.end()) corrupt("dangling-reference");
            seen.insert(*r);
            frontier.emplace(it->second.index, *r);
        }
    }
    return out;
}

LogicalView TangleGraph::build_logical_view() const {
    validate(!pruned_.empty());
    LogicalView view;
    for (const auto& id : order_) {
        const auto& e = elements_.at(id).element;
        if (const auto* core = std::get_if<CoreElement>(&e))
            view.stream.push_back({core->chunk.chunk_name, core->version, id});
    }
    for (const auto& [name, vers] : versions_)
        if (!vers.empty()) view.latest_version[name] = vers.rbegin()->first;
    return view;
}

std::vector<ChunkRef> TangleGraph::resolve_version(const VersionSelector& sel) const {
    if (sel.kind == VersionSelector::Kind::Exact && sel.k < 0)
        throw TangleError(TangleErrc::InvalidVersion, "resolve_version: negative version");
    std::vector<ChunkRef> out;
    std::set<std::string> done;
    for (const auto& id : order_) {
        const auto* core = std::get_if<CoreElement>(&elements_.at(id).element);
        if (!core || done.count(core->chunk.chunk_name)) continue;
        done.insert(core->chunk.chunk_name);
        const auto& vers = versions_.at(core->chunk.chunk_name);
        std::optional<ElementId> chosen;
        switch (sel.kind) {
        case VersionSelector::Kind::Latest:
            chosen = vers.rbegin()->second;
            break;
        case VersionSelector::Kind::Initial: {
            auto it = vers.find(0);
            if (it != vers.end()) chosen = it->second;
            break;
        }
        case VersionSelector::Kind::Exact: {
            auto it = vers.upper_bound(static_cast<std::uint64_t>(sel.k));
            if (it != vers.begin()) chosen = std::prev(it)->second;
            break;
        }
        }
        if (chosen)
            out.push_back(std::get<CoreElement>(elements_.at(*chosen).element).chunk);
    }
    return out;
}

std::optional<ElementId> TangleGraph::element_for_chunk_version(const std::string& chunk_name,
                                                               std::uint64_t version) const {
    auto it = versions_.find(chunk_name);
    if (it == versions_.end()) return std::nullopt;
    auto vit = it->second.find(version);
    if (vit == it->second.end()) return std::nullopt;
    return vit->second;
}

std::vector<std::uint64_t> TangleGraph::list_versions(const std::string& chunk_name) const {
    std::vector<std::uint64_t> out;
    auto it = versions_.find(chunk_name);
    if (it == versions_.end()) return out;
    for (const auto& [v, id] : it->second) out.push_back(v);
    return out;
}

std::optional<ElementId> TangleGraph::latest_version_element(const std::string& chunk_name) const {
    auto it = versions_.find(chunk_name);
    if (it == versions_.end() || it->second.empty()) return std::nullopt;
    return it->second.rbegin()->second;
}

std::optional<ElementId> TangleGraph::latest_core() const {
    for (auto it = order_.rbegin(); it != order_.rend(); ++it)
        if (is_core(elements_.at(*it).element)) return *it;
    return std::nullopt;
}

void TangleGraph::validate(bool pruned_tolerant) const {
    // (a) stored id equals content hash
    for (const auto& [id, stored] : elements_)
        if (element_id(stored.element) != id) corrupt("hash-mismatch");

    // (b) structure and reference resolution
    std::size_t genesis_count = 0;
    for (const auto& [id, stored] : elements_) {
        auto [r1, r2] = refs_of(stored.element);
        if (const auto* core = std::get_if<CoreElement>(&stored.element)) {
            if (core->chunk.chunk_name.empty()) corrupt("empty chunk name");
            if (!r1 && !r2) {
                ++genesis_count;
            } else if (!r1 || !r2) {
                corrupt("non-genesis element missing a reference");
            }
        } else {
            const auto& ack = std::get<AckElement>(stored.element);
            if (ack.acked_ref == ack.random_ref) corrupt("ack references itself twice");
            auto tit = elements_.find(ack.acked_ref);
            if (tit != elements_.end() && !is_core(tit->second.element))
                corrupt("ack targets an ack element");
        }
        for (const auto& r : {r1, r2})
            if (r && !ref_resolves(*r, pruned_tolerant)) corrupt("dangling-reference");
    }
    if (!elements_.empty() && genesis_count > 1) corrupt("second genesis element");
    if (!pruned_tolerant && !elements_.empty() && genesis_count == 0)
        corrupt("no genesis element");

    // (c) acyclicity via Kahn's algorithm over reference edges
    std::map<ElementId, std::size_t> out_deg;
    std::map<ElementId, std::vector<ElementId>> rev;
    for (const auto& [id, stored] : elements_) {
        auto [r1, r2] = refs_of(stored.element);
        std::size_t d = 0;
        for (const auto& r : {r1, r2}) {
            if (!r || !elements_.count(*r)) continue;
            ++d;
            rev[*r].push_back(id);
        }
        out_deg[id] = d;
    }
    std::deque<ElementId> ready;
    for (const auto& [id, d] : out_deg)
        if (d == 0) ready.push_back(id);
    std::size_t processed = 0;
    while (!ready.empty()) {
        ElementId id = ready.front();
        ready.pop_front();
        ++processed;
        auto rit = rev.find(id);
        if (rit == rev.end()) continue;
        for (const auto& up : rit->second)
            if (--out_deg[up] == 0) ready.push_back(up);
    }
    if (processed != elements_.size()) corrupt("cycle");

    // (d) one acknowledgement per (origin, target)
    std::set<std::pair<std::string, ElementId>> ack_pairs;
    for (const auto& [id, stored] : elements_) {
        if (const auto* ack = std::get_if<AckElement>(&stored.element)) {
            if (!ack_pairs.emplace(ack->origin, ack->acked_ref).second) corrupt("duplicate-ack");
        }
    }

    // (e) tip set equals the zero-in-degree scan
    std::set<ElementId> expect_tips;
    for (const auto& [id, stored] : elements_) expect_tips.insert(id);
    for (const auto& [id, stored] : elements_) {
        auto [r1, r2] = refs_of(stored.element);
        for (const auto& r : {r1, r2})
            if (r) expect_tips.erase(*r);
    }
    if (expect_tips != tips_) corrupt("tip-set-mismatch");

    // (f) signatures verify under the pluggable scheme
    for (const auto& [id, stored] : elements_)
        if (!verify_element_signature(stored.element, *scheme_)) corrupt("bad-signature");

    // version chain: a core at version v > 0 descends from v-1 of the same chunk
    for (const auto& [id, stored] : elements_) {
        const auto* core = std::get_if<CoreElement>(&stored.element);
        if (!core || core->version == 0) continue;
        if (!core->primary_ref) corrupt("versioned element without primary");
        auto pit = elements_.find(*core->primary_ref);
        if (pit == elements_.end()) continue; // pruned, checked above
        const auto* prev = std::get_if<CoreElement>(&pit->second.element);
        if (!prev || prev->chunk.chunk_name != core->chunk.chunk_name ||
            prev->version + 1 != core->version)
            corrupt("broken version chain");
    }
}

void TangleGraph::drop_stale(std::uint64_t keep_versions) {
    if (keep_versions < 1) throw std::invalid_argument("drop_stale: keep_versions must be >= 1");
    std::set<ElementId> removed;
    for (const auto& [name, vers] : versions_) {
        if (vers.size() <= keep_versions) continue;
        std::size_t drop = vers.size() - keep_versions;
        for (auto it = vers.begin(); drop-- > 0; ++it) removed.insert(it->second);
    }
    if (removed.empty()) return;
    // acks targeting removed cores go with them
    for (const auto& [id, stored] : elements_) {
        if (const auto* ack = std::get_if<AckElement>(&stored.element))
            if (removed.count(ack->acked_ref)) removed.insert(id);
    }
    for (const auto& id : removed) {
        elements_.erase(id);
        pruned_.insert(id);
    }
    rebuild_derived_state();
}

void TangleGraph::rebuild_derived_state() {
    std::vector<ElementId> new_order;
    for (const auto& id : order_)
        if (elements_.count(id)) new_order.push_back(id);
    order_ = std::move(new_order);
    incoming_.clear();
    tips_.clear();
    ack_origins_.clear();
    versions_.clear();
    for (const auto& id : order_) tips_.insert(id);
    for (const auto& id : order_) {
        const auto& e = elements_.at(id).element;
        auto [r1, r2] = refs_of(e);
        for (const auto& r : {r1, r2}) {
            if (!r || !elements_.count(*r)) continue;
            incoming_[*r].insert(id);
            tips_.erase(*r);
        }
        if (const auto* core = std::get_if<CoreElement>(&e))
            versions_[core->chunk.chunk_name][core->version] = id;
        else
            ack_origins_[std::get<AckElement>(e).acked_ref].insert(origin_of(e));
    }
}

} // namespace tcn
