#include "tcn/forwarder.hpp"

#include <algorithm>

#include "tcn/sync_wire.hpp"
#include "tcn/wire.hpp"

namespace tcn {

std::string Forwarder::pit_key(const ContentName& name, bool must_be_fresh) const {
    return name.render() + (must_be_fresh ? "|1" : "|0");
}

void Forwarder::on_interest(Interest interest, int in_face, double now) {
    if (in_face != kAppFace) ++counters_.interests_received;

    if (--interest.hop_budget <= 0) return;

    if (interest.nonce != 0) {
        auto key = std::make_pair(interest.name.render(), interest.nonce);
        if (in_face != kAppFace && !seen_nonces_.insert(key).second) {
            ++counters_.drops_duplicate_nonce;
            return;
        }
        if (in_face == kAppFace) seen_nonces_.insert(key);
    }

    // Tunnel route maintenance runs at every hop an interest passes:
    // confirm flips the provisional handshake routes persistent, heartbeats
    // renew them.
    if (auto t = parse_sync_tunnel_name(interest.name)) {
        double expiry = now + cfg_.sync_route_ttl_s;
        if (t->verb == "confirm") {
            confirm_routes(t->r_prefix, expiry);
            confirm_routes(t->i_prefix, expiry);
        } else if (t->verb == "heartbeat") {
            renew_routes(t->r_prefix, expiry);
            renew_routes(t->i_prefix, expiry);
        }
    }

    if (special_interest && special_interest(interest, in_face, now)) return;

    auto reply = [&](const DataPacket& data) {
        if (in_face == kAppFace) {
            if (app_deliver) app_deliver(data, now);
        } else {
            ++counters_.data_sent;
            counters_.data_bytes_sent += data.wire_size();
            send(in_face, DataPacket(data));
        }
    };

    if (const DataPacket* cached = cs_lookup(interest.name, interest.must_be_fresh, now)) {
        ++counters_.cs_hits;
        reply(*cached);
        return;
    }

    if (local_app) {
        if (auto data = local_app(interest, in_face, now)) {
            cs_insert(*data, now);
            reply(*data);
            return;
        }
    }

    std::string key = pit_key(interest.name, interest.must_be_fresh);
    auto pit_it = pit_.find(key);
    if (pit_it != pit_.end() && pit_it->second.expires_at > now) {
        // aggregate: record the face, forward nothing
        if (pit_it->second.in_faces.insert(in_face).second) ++counters_.pit_aggregated;
        return;
    }
    PitEntry entry;
    entry.in_faces.insert(in_face);
    entry.expires_at = now + cfg_.interest_lifetime_s;
    pit_[key] = entry;

    auto out_face = longest_prefix_match(interest.name, in_face, now);
    if (!out_face) {
        ++counters_.drops_no_route;
        return;
    }
    ++counters_.interests_sent;
    send(*out_face, Interest(interest));
}

void Forwarder::satisfy_pit(const DataPacket& data, int in_face, double now) {
    std::set<int> faces;
    for (bool mbf : {false, true}) {
        auto it = pit_.find(pit_key(data.name, mbf));
        if (it == pit_.end()) continue;
        if (it->second.expires_at > now)
            faces.insert(it->second.in_faces.begin(), it->second.in_faces.end());
        pit_.erase(it);
    }
    if (faces.empty()) {
        ++counters_.drops_unsolicited;
        return;
    }
    maybe_install_tunnel(data, in_face, faces, now);
    for (int face : faces) {
        if (face == kAppFace) {
            if (app_deliver) app_deliver(data, now);
        } else {
            ++counters_.data_sent;
            counters_.data_bytes_sent += data.wire_size();
            send(face, DataPacket(data));
        }
    }
    cs_insert(data, now);
    if (on_data_passing) on_data_passing(data, in_face, now);

    if (data.kind == PayloadKind::Chunk) {
        note_chunk_seen(data.name.render(), data.content_hash);
    } else if (data.kind == PayloadKind::TangleElement) {
        if (auto parsed = parse_element_name(data.name)) {
            if (mst_tracks(parsed->ndo_name)) {
                try {
                    Element e = decode_element(
                        std::span<const std::uint8_t>(data.bytes.data(), data.bytes.size()));
                    store_in_mst(parsed->ndo_name, e);
                } catch (const WireError&) {
                    ++counters_.elements_rejected;
                }
            }
        }
    }
}

void Forwarder::on_data(const DataPacket& data, int in_face, double now) {
    if (in_face != kAppFace) {
        ++counters_.data_received;
        counters_.data_bytes_received += data.wire_size();
    }
    satisfy_pit(data, in_face, now);
}

void Forwarder::maybe_install_tunnel(const DataPacket& data, int in_face,
                                     const std::set<int>& out_faces, double now) {
    if (data.kind != PayloadKind::SyncControl) return;
    if (!parse_sync_partner_name(data.name)) return;
    auto offer = SyncOffer::decode(std::span<const std::uint8_t>(data.bytes.data(),
                                                                 data.bytes.size()));
    if (!offer) return;
    double expiry = now + offer->provisional_ttl_s;
    ContentName r = sync_tunnel_prefix(offer->ndo_name, offer->nonce, 'r');
    ContentName i = sync_tunnel_prefix(offer->ndo_name, offer->nonce, 'i');
    if (in_face != kAppFace) install_route(r, in_face, expiry, true);
    for (int f : out_faces)
        if (f != kAppFace) install_route(i, f, expiry, true);
}

void Forwarder::install_route(const ContentName& prefix, int face, double expires_at,
                              bool provisional) {
    for (auto& e : fib_) {
        if (e.prefix == prefix && e.face == face) {
            e.expires_at = std::max(e.expires_at, expires_at);
            e.provisional = e.provisional && provisional;
            return;
        }
    }
    fib_.push_back(FibEntry{prefix, face, expires_at, provisional});
}

void Forwarder::expire_routes(double now) {
    std::erase_if(fib_, [now](const FibEntry& e) { return e.expires_at <= now; });
}

void Forwarder::confirm_routes(const ContentName& prefix, double expires_at) {
    for (auto& e : fib_) {
        if (e.prefix == prefix) {
            e.provisional = false;
            e.expires_at = expires_at;
        }
    }
}

void Forwarder::renew_routes(const ContentName& prefix, double expires_at) {
    for (auto& e : fib_)
        if (e.prefix == prefix) e.expires_at = std::max(e.expires_at, expires_at);
}

void Forwarder::drop_routes(const ContentName& prefix) {
    std::erase_if(fib_, [&](const FibEntry& e) { return e.prefix == prefix; });
}

std::optional<int> Forwarder::longest_prefix_match(const ContentName& name, int exclude_face,
                                                   double now) const {
    const FibEntry* best = nullptr;
    for (const auto& e : fib_) {
        if (e.expires_at <= now) continue; // expired entries are never used
        if (e.face == exclude_face) continue;
        if (!e.prefix.is_prefix_of(name)) continue;
        if (!best || e.prefix.components.size() > best->prefix.components.size() ||
            (e.prefix.components.size() == best->prefix.components.size() &&
             e.face < best->face))
            best = &e;
    }
    if (!best) return std::nullopt;
    return best->face;
}

const DataPacket* Forwarder::cs_lookup(const ContentName& name, bool must_be_fresh, double now) {
    auto it = cs_.find(name.render());
    if (it == cs_.end()) return nullptr;
    if (must_be_fresh && now - it->second.stored_at > it->second.data.freshness_s)
        return nullptr; // stale entries never serve must-be-fresh
    cs_lru_.erase(it->second.lru_it);
    cs_lru_.push_front(it->first);
    it->second.lru_it = cs_lru_.begin();
    return &it->second.data;
}

void Forwarder::cs_insert(const DataPacket& data, double now) {
    if (cfg_.cs_capacity == 0) return;
    std::string key = data.name.render();
    auto it = cs_.find(key);
    if (it != cs_.end()) {
        it->second.data = data;
        it->second.stored_at = now;
        cs_lru_.erase(it->second.lru_it);
        cs_lru_.push_front(key);
        it->second.lru_it = cs_lru_.begin();
        return;
    }
    while (cs_.size() >= cfg_.cs_capacity) {
        cs_.erase(cs_lru_.back());
        cs_lru_.pop_back();
    }
    cs_lru_.push_front(key);
    cs_.emplace(key, CsEntry{data, now, cs_lru_.begin()});
}

TangleGraph* Forwarder::mst_find(const std::string& tangle_name) {
    auto it = mst_.find(tangle_name);
    return it == mst_.end() ? nullptr : &it->second;
}

const TangleGraph* Forwarder::mst_find(const std::string& tangle_name) const {
    auto it = mst_.find(tangle_name);
    return it == mst_.end() ? nullptr : &it->second;
}

TangleGraph& Forwarder::mst_track(TangleGraph graph) {
    std::string name = graph.ndo_name();
    auto [it, inserted] = mst_.insert_or_assign(name, std::move(graph));
    return it->second;
}

std::vector<ElementId> Forwarder::try_insert_element(const std::string& tangle_name,
                                                     const Element& element) {
    TangleGraph* graph = mst_find(tangle_name);
    std::vector<ElementId> acks;
    if (!graph) return acks;

    auto [r1, r2] = [&] {
        if (const auto* core = std::get_if<CoreElement>(&element))
            return std::make_pair(core->primary_ref, core->secondary_ref);
        const auto& ack = std::get<AckElement>(element);
        return std::make_pair(std::optional<ElementId>(ack.acked_ref),
                              std::optional<ElementId>(ack.random_ref));
    }();
    for (const auto& r : {r1, r2}) {
        if (r && !graph->contains(*r) && !graph->was_pruned(*r)) {
            pending_elements_.push_back(PendingElement{tangle_name, element});
            return acks;
        }
    }
    if (!r1 && !r2 && !graph->empty() && !graph->contains(element_id(element))) {
        // a second genesis cannot be inserted
        ++counters_.elements_rejected;
        return acks;
    }

    try {
        bool known = graph->contains(element_id(element));
        ElementId id = graph->insert(element);
        if (!known && is_core(element)) {
            auto a = ack_if_verified(tangle_name, id);
            acks.insert(acks.end(), a.begin(), a.end());
        }
    } catch (const TangleError&) {
        ++counters_.elements_rejected;
    }
    return acks;
}

std::vector<ElementId> Forwarder::store_in_mst(const std::string& tangle_name,
                                               const Element& element) {
    auto acks = try_insert_element(tangle_name, element);
    drain_pending(tangle_name, acks);
    if (!acks.empty() && on_acks_appended) on_acks_appended(tangle_name, acks);
    return acks;
}

void Forwarder::drain_pending(const std::string& tangle_name, std::vector<ElementId>& acks_out) {
    bool progress = true;
    while (progress) {
        progress = false;
        for (std::size_t i = 0; i < pending_elements_.size();) {
            auto& p = pending_elements_[i];
            if (p.tangle_name != tangle_name) {
                ++i;
                continue;
            }
            TangleGraph* graph = mst_find(p.tangle_name);
            bool ready = graph != nullptr;
            if (ready) {
                auto refs = [&] {
                    if (const auto* core = std::get_if<CoreElement>(&p.element))
                        return std::make_pair(core->primary_ref, core->secondary_ref);
                    const auto& ack = std::get<AckElement>(p.element);
                    return std::make_pair(std::optional<ElementId>(ack.acked_ref),
                                          std::optional<ElementId>(ack.random_ref));
                }();
                for (const auto& r : {refs.first, refs.second})
                    if (r && !graph->contains(*r) && !graph->was_pruned(*r)) ready = false;
            }
            if (!ready) {
                ++i;
                continue;
            }
            PendingElement p2 = std::move(pending_elements_[i]);
            pending_elements_.erase(pending_elements_.begin() + static_cast<std::ptrdiff_t>(i));
            try {
                TangleGraph* g = mst_find(p2.tangle_name);
                bool known = g->contains(element_id(p2.element));
                ElementId id = g->insert(p2.element);
                if (!known && is_core(p2.element)) {
                    auto a = ack_if_verified(p2.tangle_name, id);
                    acks_out.insert(acks_out.end(), a.begin(), a.end());
                }
            } catch (const TangleError&) {
                ++counters_.elements_rejected;
            }
            progress = true;
        }
    }
}

std::vector<ElementId> Forwarder::ack_if_verified(const std::string& tangle_name,
                                                  const ElementId& id) {
    std::vector<ElementId> acks;
    TangleGraph* graph = mst_find(tangle_name);
    if (!graph || !graph->contains(id)) return acks;
    const auto* core = std::get_if<CoreElement>(&graph->element(id));
    if (!core || core->origin == node_id_) return acks;

    auto seen = seen_chunks_.find(core->chunk.chunk_name);
    if (seen == seen_chunks_.end()) {
        awaiting_chunk_[core->chunk.chunk_name] = AwaitingChunk{tangle_name, id,
                                                                core->chunk.chunk_hash};
        return acks;
    }
    if (seen->second != core->chunk.chunk_hash) {
        ++counters_.verification_failures;
        return acks;
    }
    if (auto ack_id = graph->append_ack(id, node_id_, *rng_)) acks.push_back(*ack_id);
    return acks;
}

std::vector<ElementId> Forwarder::note_chunk_seen(const std::string& chunk_name,
                                                  const Hash256& hash) {
    seen_chunks_[chunk_name] = hash;
    std::vector<ElementId> acks;
    auto it = awaiting_chunk_.find(chunk_name);
    if (it == awaiting_chunk_.end()) return acks;
    AwaitingChunk waiting = it->second;
    awaiting_chunk_.erase(it);
    if (waiting.expected_hash != hash) {
        ++counters_.verification_failures;
        return acks;
    }
    TangleGraph* graph = mst_find(waiting.tangle_name);
    if (!graph || !graph->contains(waiting.core_id)) return acks;
    if (auto ack_id = graph->append_ack(waiting.core_id, node_id_, *rng_))
        acks.push_back(*ack_id);
    if (!acks.empty() && on_acks_appended) on_acks_appended(waiting.tangle_name, acks);
    return acks;
}

} // namespace tcn
