#include "tcn/sync.hpp"

#include <algorithm>
#include <cassert>

#include "tcn/wire.hpp"

namespace tcn {

namespace {

// Advertised tip lists are bounded: the newest tips carry enough signal
// for divergence repair, and full tip sets grow with every
// acknowledgement.
constexpr std::size_t kTipAdvertiseCap = 16;

std::vector<ElementId> advertised_tips(const TangleGraph& g) {
    std::vector<ElementId> out;
    const auto& tips = g.tips();
    const auto& order = g.insertion_order();
    for (auto it = order.rbegin(); it != order.rend() && out.size() < kTipAdvertiseCap; ++it)
        if (tips.count(*it)) out.push_back(*it);
    return out;
}

} // namespace


namespace {

ContentName chunk_fetch_name(const ChunkRef& chunk) {
    ContentName name = ContentName::parse(chunk.chunk_name);
    name.components.push_back(to_hex(chunk.chunk_hash));
    return name;
}

ContentName bundle_name(const std::string& ndo, std::uint64_t version) {
    ContentName name = ContentName::parse(ndo);
    name.components.push_back("delta");
    name.components.push_back(std::to_string(version));
    return name;
}

std::optional<std::uint64_t> parse_bundle_name(const ContentName& name,
                                               const std::string& ndo) {
    ContentName prefix = ContentName::parse(ndo);
    if (name.components.size() != prefix.components.size() + 2) return std::nullopt;
    if (!prefix.is_prefix_of(name)) return std::nullopt;
    if (name.components[prefix.components.size()] != "delta") return std::nullopt;
    const std::string& v = name.components.back();
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        return std::nullopt;
    return std::stoull(v);
}

std::pair<std::optional<ElementId>, std::optional<ElementId>> refs_of(const Element& e) {
    if (const auto* core = std::get_if<CoreElement>(&e))
        return {core->primary_ref, core->secondary_ref};
    const auto& ack = std::get<AckElement>(e);
    return {ack.acked_ref, ack.random_ref};
}

} // namespace

SyncEngine::SyncEngine(SimWorld& world, int node_id, SyncConfig cfg)
    : world_(world), node_id_(node_id), cfg_(cfg) {}

SyncEngine::~SyncEngine() { active_ = false; }

Node& SyncEngine::node() { return world_.node(node_id_); }
Forwarder& SyncEngine::fwd() { return node().fwd(); }

TangleGraph* SyncEngine::graph() { return fwd().mst_find(ndo_); }
const TangleGraph* SyncEngine::graph() const {
    return world_.node(node_id_).fwd().mst_find(ndo_);
}

std::size_t SyncEngine::established_sessions() const {
    std::size_t n = 0;
    for (const auto& [nonce, s] : sessions_)
        if (s.state == Session::State::Established) ++n;
    return n;
}

ContentName SyncEngine::tunnel_out(const Session& s,
                                   std::initializer_list<std::string> verbs) {
    ContentName name = sync_tunnel_prefix(ndo_, s.nonce, s.initiated ? 'r' : 'i');
    for (const auto& v : verbs) name.components.push_back(v);
    return name;
}

void SyncEngine::become_producer(const std::string& ndo_name) {
    producer_ = true;
    ndo_ = ndo_name;
    active_ = true;
    status_ = SyncStatus::Synced;
    if (cfg_.mode == ManifestMode::Tangle) fwd().mst_track(TangleGraph(ndo_));

    fwd().special_interest = [this](const Interest& i, int in_face, double now) {
        return answer_findsyncpartner(i, in_face, now);
    };
    node().app_answer = [this](const Interest& i, int in_face, double now) {
        return answer(i, in_face, now);
    };
    fwd().on_acks_appended = [this](const std::string& t, const std::vector<ElementId>& ids) {
        if (t != ndo_) return;
        for (auto& [nonce, s] : sessions_)
            if (s.state == Session::State::Established)
                s.queued.insert(ids.begin(), ids.end());
    };

    double phase = cfg_.poll_interval_s * (0.5 + 0.5 * ((node_id_ % 8) / 8.0));
    world_.schedule(phase, [this] { poll_tick(); });
}

void SyncEngine::publish_initial(const std::vector<ChunkRef>& chunks) {
    assert(producer_ && !chunks.empty());
    ndo_version_ = 1;
    target_version_ = completed_version_ = reported_version_ = 1;

    std::vector<ChunkRef> list(chunks);
    for (const auto& c : chunks) {
        chunks_[c.chunk_name] = c;
        fetched_chunks_[c.chunk_name] = c.chunk_hash;
        node().serve_chunk(chunk_fetch_name(c).render(), c.chunk_hash, c.size_bytes);
    }

    if (cfg_.mode == ManifestMode::Tangle) {
        ChunkRef anchor{ndo_ + "/genesis", sha256(std::string_view{}), 0};
        TangleGraph& g = fwd().mst_track(
            TangleGraph::genesis(ndo_, anchor, fwd().node_id()));
        batches_[1].push_back(g.insertion_order().front());
        for (const auto& c : chunks) {
            ElementId id = g.append_core(c, *g.latest_core(), fwd().node_id(), world_.rng());
            batches_[1].push_back(id);
        }
    } else {
        flic_ = flic_build(ndo_, list, cfg_.flic_fanout, 0);
        flic_generation_ = 0;
        flic_publish(0);
    }
}

std::uint64_t SyncEngine::publish_update(UpdateMode update, const std::vector<ChunkRef>& chunks) {
    assert(producer_ && ndo_version_ >= 1);
    ++ndo_version_;
    target_version_ = completed_version_ = reported_version_ = ndo_version_;

    for (const auto& c : chunks) {
        chunks_[c.chunk_name] = c;
        fetched_chunks_[c.chunk_name] = c.chunk_hash;
        node().serve_chunk(chunk_fetch_name(c).render(), c.chunk_hash, c.size_bytes);
    }

    if (cfg_.mode == ManifestMode::Tangle) {
        TangleGraph& g = *graph();
        for (const auto& c : chunks) {
            ElementId id = update == UpdateMode::Version
                               ? g.append_version(c.chunk_name, c, fwd().node_id(), world_.rng())
                               : g.append_core(c, *g.latest_core(), fwd().node_id(),
                                               world_.rng());
            batches_[ndo_version_].push_back(id);
        }
    } else {
        std::vector<ChunkRef> all;
        all.reserve(chunks_.size());
        for (const auto& [name, c] : chunks_) all.push_back(c);
        auto rebuilt = flic_rebuild(*flic_, all);
        flic_ = std::move(rebuilt.manifest);
        flic_generation_ = flic_->generation;
        flic_publish(flic_generation_);
    }

    for (auto& [nonce, s] : sessions_) {
        if (s.state != Session::State::Established) continue;
        s.announce = true;
        flush_session(s);
    }
    return ndo_version_;
}

void SyncEngine::flic_publish(std::uint64_t generation) {
    (void)generation;
    for (const auto& n : flic_->nodes) {
        DataPacket d;
        d.name = ContentName::parse(n.node_name);
        d.kind = PayloadKind::FlicNode;
        d.bytes = n.encode();
        d.content_hash = n.content_hash();
        node().serve_data(std::move(d));
    }
}

void SyncEngine::subscribe(const std::string& ndo_name) {
    producer_ = false;
    ndo_ = ndo_name;
    active_ = true;
    status_ = SyncStatus::Bootstrapping;
    if (cfg_.mode == ManifestMode::Tangle) {
        fwd().mst_track(TangleGraph(ndo_));
        // The genesis anchor carries no content; its empty-payload hash is
        // known a priori so the anchor is verifiable without a fetch.
        fwd().note_chunk_seen(ndo_ + "/genesis", sha256(std::string_view{}));
    }

    fwd().special_interest = [this](const Interest& i, int in_face, double now) {
        return answer_findsyncpartner(i, in_face, now);
    };
    node().app_answer = [this](const Interest& i, int in_face, double now) {
        return answer(i, in_face, now);
    };
    fwd().on_acks_appended = [this](const std::string& t, const std::vector<ElementId>& ids) {
        if (t != ndo_) return;
        for (auto& [nonce, s] : sessions_)
            if (s.state == Session::State::Established)
                s.queued.insert(ids.begin(), ids.end());
    };

    poll_tips();
    start_discovery();
    double phase = cfg_.poll_interval_s * (0.5 + 0.5 * ((node_id_ % 8) / 8.0));
    world_.schedule(phase, [this] { poll_tick(); });
}

// --- discovery and session lifecycle ---------------------------------

void SyncEngine::start_discovery() {
    if (producer_ || !active_) return;
    std::uint64_t nonce = world_.next_nonce();
    Session s;
    s.nonce = nonce;
    s.initiated = true;
    s.state = Session::State::Discovering;
    s.last_heard = world_.now();
    sessions_[nonce] = s;

    Interest i;
    i.name = sync_partner_name(ndo_, nonce);
    node().express_interest(
        std::move(i),
        [this, nonce](const DataPacket* data, double now) {
            auto it = sessions_.find(nonce);
            if (it == sessions_.end()) return;
            if (!data) {
                sessions_.erase(it);
                return;
            }
            it->second.last_heard = now;
            on_offer(*data, now);
        },
        cfg_.fetch_timeout_s);
}

void SyncEngine::on_offer(const DataPacket& data, double) {
    auto offer = SyncOffer::decode(
        std::span<const std::uint8_t>(data.bytes.data(), data.bytes.size()));
    if (!offer || offer->ndo_name != ndo_) return;
    auto it = sessions_.find(offer->nonce);
    if (it == sessions_.end() || !it->second.initiated) return;
    if (it->second.state != Session::State::Discovering) return;
    it->second.state = Session::State::Confirming;
    send_confirm(offer->nonce, 0);
}

void SyncEngine::send_confirm(std::uint64_t nonce, int attempt) {
    auto it = sessions_.find(nonce);
    if (it == sessions_.end() || it->second.state != Session::State::Confirming) return;
    Interest i;
    i.name = tunnel_out(it->second, {"confirm", std::to_string(attempt)});
    node().express_interest(
        std::move(i),
        [this, nonce, attempt](const DataPacket* data, double now) {
            auto sit = sessions_.find(nonce);
            if (sit == sessions_.end()) return;
            if (!data) {
                if (attempt + 1 < 3)
                    send_confirm(nonce, attempt + 1);
                else
                    drop_session(nonce);
                return;
            }
            Session& s = sit->second;
            s.state = Session::State::Established;
            s.last_heard = now;
            s.missed_heartbeats = 0;
            ++stats_.handshakes_completed;
            world_.schedule(cfg_.heartbeat_interval_s,
                            [this, nonce] { heartbeat_tick(nonce); });
        },
        cfg_.fetch_timeout_s);
}

bool SyncEngine::answer_findsyncpartner(const Interest& interest, int in_face, double now) {
    if (!active_ || in_face == Forwarder::kAppFace) return false;
    auto p = parse_sync_partner_name(interest.name);
    if (!p || p->tangle_name != ndo_) return false;
    bool can_serve =
        producer_ || (cfg_.mode == ManifestMode::Tangle && status_ == SyncStatus::Synced);
    if (!can_serve) return false;
    if (sessions_.count(p->nonce)) return true; // retransmission of a known handshake

    Session s;
    s.nonce = p->nonce;
    s.initiated = false;
    s.state = Session::State::Confirming;
    s.last_heard = now;
    sessions_[p->nonce] = s;

    fwd().install_route(sync_tunnel_prefix(ndo_, p->nonce, 'i'), in_face,
                        now + cfg_.provisional_ttl_s, true);

    SyncOffer offer;
    offer.ndo_name = ndo_;
    offer.nonce = p->nonce;
    offer.responder_id = fwd().node_id();
    offer.provisional_ttl_s = cfg_.provisional_ttl_s;

    DataPacket d;
    d.name = interest.name;
    d.kind = PayloadKind::SyncControl;
    d.bytes = offer.encode();
    d.freshness_s = 0;
    fwd().send(in_face, std::move(d));
    return true;
}

void SyncEngine::drop_session(std::uint64_t nonce) {
    auto it = sessions_.find(nonce);
    if (it == sessions_.end()) return;
    fwd().drop_routes(sync_tunnel_prefix(ndo_, nonce, 'r'));
    fwd().drop_routes(sync_tunnel_prefix(ndo_, nonce, 'i'));
    sessions_.erase(it);
    ++stats_.sessions_dropped;
}

void SyncEngine::heartbeat_tick(std::uint64_t nonce) {
    if (!active_) return;
    auto it = sessions_.find(nonce);
    if (it == sessions_.end() || it->second.state != Session::State::Established) return;
    Interest i;
    i.name = tunnel_out(it->second, {"heartbeat", std::to_string(it->second.seq++)});
    node().express_interest(
        std::move(i),
        [this, nonce](const DataPacket* data, double now) {
            auto sit = sessions_.find(nonce);
            if (sit == sessions_.end()) return;
            Session& s = sit->second;
            if (data) {
                s.missed_heartbeats = 0;
                s.last_heard = now;
            } else if (++s.missed_heartbeats >= cfg_.heartbeat_miss_limit) {
                drop_session(nonce);
                return;
            }
            world_.schedule(cfg_.heartbeat_interval_s, [this, nonce] { heartbeat_tick(nonce); });
        },
        cfg_.fetch_timeout_s);
}

// --- periodic reconciliation ----------------------------------------

void SyncEngine::poll_tick() {
    if (!active_) return;
    world_.schedule(cfg_.poll_interval_s, [this] { poll_tick(); });
    double now = world_.now();

    // Responder-side liveness: no traffic for a full route TTL means the
    // initiator is gone.
    std::vector<std::uint64_t> dead;
    for (auto& [nonce, s] : sessions_)
        if (!s.initiated && s.state == Session::State::Established &&
            now - s.last_heard > cfg_.route_ttl_s)
            dead.push_back(nonce);
    for (auto nonce : dead) drop_session(nonce);

    for (auto& [nonce, s] : sessions_) flush_session(s);

    if (!producer_) {
        if (sessions_.empty()) start_discovery();
        poll_tips();
    }
}

void SyncEngine::poll_tips() {
    if (producer_ || !active_) return;
    ++stats_.tip_polls;
    Interest i;
    i.name = tip_content_name(ndo_, 0, true);
    i.must_be_fresh = true;
    node().express_interest(
        std::move(i),
        [this](const DataPacket* data, double now) {
            if (!data) {
                ++stats_.tip_poll_failures;
                if (++consecutive_poll_failures_ >= cfg_.offline_poll_failures)
                    status_ = SyncStatus::Offline;
                return;
            }
            consecutive_poll_failures_ = 0;
            if (status_ == SyncStatus::Offline) status_ = SyncStatus::Bootstrapping;
            repair_pending_ = false;
            auto msg = TipInfoMsg::decode(
                std::span<const std::uint8_t>(data->bytes.data(), data->bytes.size()));
            if (msg && msg->ndo_name == ndo_) on_tip_info(*msg, now);
            if (status_ == SyncStatus::Bootstrapping && completed_version_ > 0 &&
                completed_version_ >= target_version_ && !repair_pending_)
                status_ = SyncStatus::Synced;
        },
        cfg_.fetch_timeout_s);
}

void SyncEngine::on_tip_info(const TipInfoMsg& msg, double) {
    if (msg.version > target_version_) target_version_ = msg.version;

    if (cfg_.mode == ManifestMode::Flic) {
        if (target_version_ > completed_version_ && target_version_ >= 1)
            flic_start_fetch(target_version_ - 1);
        return;
    }

    for (std::uint64_t v = completed_version_ + 1; v <= target_version_; ++v) fetch_bundle(v, 0);
    request_missing(gate_missing_tips(msg.tips), std::nullopt);
    after_graph_change();
}

void SyncEngine::fetch_bundle(std::uint64_t version, int attempt) {
    if (attempt == 0 && !fetching_bundles_.insert(version).second) return;
    Interest i;
    i.name = bundle_name(ndo_, version);
    node().express_interest(
        std::move(i),
        [this, version, attempt](const DataPacket* data, double) {
            if (!data) {
                if (attempt + 1 < cfg_.max_fetch_retries) {
                    fetch_bundle(version, attempt + 1);
                } else {
                    fetching_bundles_.erase(version);
                    repair_pending_ = true;
                }
                return;
            }
            fetching_bundles_.erase(version);
            ++stats_.bundles_fetched;
            auto bundle = ElementBundle::decode(
                std::span<const std::uint8_t>(data->bytes.data(), data->bytes.size()));
            if (bundle)
                for (const auto& enc : bundle->elements) ingest_element_bytes(enc, std::nullopt);
            after_graph_change();
        },
        cfg_.fetch_timeout_s);
}

// Remote tips fetch only after staying missing across two sightings;
// fresh elements normally arrive through gossip or a delta bundle first.
std::vector<ElementId> SyncEngine::gate_missing_tips(const std::vector<ElementId>& tips) {
    std::vector<ElementId> missing;
    std::set<ElementId> still_missing;
    const TangleGraph* g = graph();
    for (const auto& id : tips) {
        if (!g || g->contains(id) || g->was_pruned(id)) continue;
        still_missing.insert(id);
        if (tips_missing_last_poll_.count(id)) missing.push_back(id);
    }
    tips_missing_last_poll_ = std::move(still_missing);
    return missing;
}

void SyncEngine::request_missing(const std::vector<ElementId>& ids,
                                 std::optional<std::uint64_t> via) {
    const TangleGraph* g = graph();
    if (!g) return;
    for (const auto& id : ids) {
        if (g->contains(id) || g->was_pruned(id)) continue;
        if (!fetching_elements_.insert(id).second) continue;
        fetch_element(id, via, 0);
    }
}

void SyncEngine::fetch_element(const ElementId& id, std::optional<std::uint64_t> via,
                               int attempt) {
    ContentName name;
    bool tunneled = false;
    if (via) {
        auto it = sessions_.find(*via);
        if (it != sessions_.end() && it->second.state == Session::State::Established) {
            name = tunnel_out(it->second, {"el", to_hex(id)});
            tunneled = true;
        }
    }
    if (!tunneled) {
        name = ContentName::parse(ndo_);
        name.components.push_back(to_hex(id));
    }

    Interest i;
    i.name = std::move(name);
    node().express_interest(
        std::move(i),
        [this, id, via, attempt, tunneled](const DataPacket* data, double) {
            if (!data) {
                if (attempt + 1 < cfg_.max_fetch_retries) {
                    // after a tunneled failure, fall back to the plain route
                    fetch_element(id, tunneled && attempt >= 1 ? std::nullopt : via,
                                  attempt + 1);
                } else {
                    fetching_elements_.erase(id);
                    repair_pending_ = true;
                }
                return;
            }
            fetching_elements_.erase(id);
            ++stats_.elements_fetched;
            ingest_element_bytes(data->bytes, std::nullopt);
            after_graph_change();
        },
        cfg_.fetch_timeout_s);
}

void SyncEngine::ingest_element_bytes(const std::vector<std::uint8_t>& enc,
                                      std::optional<std::uint64_t> from_session) {
    if (cfg_.mode != ManifestMode::Tangle) return;
    Element e;
    try {
        e = decode_element(std::span<const std::uint8_t>(enc.data(), enc.size()));
    } catch (const WireError&) {
        return;
    }
    if (ndo_name_of(e) != ndo_) return;
    ElementId id = element_id(e);
    TangleGraph* g = graph();
    if (!g || g->contains(id) || g->was_pruned(id)) return;

    fwd().store_in_mst(ndo_, e);

    if (g->contains(id)) {
        for (auto& [nonce, s] : sessions_) {
            if (s.state != Session::State::Established) continue;
            if (from_session && *from_session == nonce) continue;
            s.queued.insert(id);
        }
    } else {
        // parked until its references resolve; chase them
        auto [r1, r2] = refs_of(e);
        std::vector<ElementId> refs;
        for (const auto& r : {r1, r2})
            if (r && !g->contains(*r) && !g->was_pruned(*r)) refs.push_back(*r);
        request_missing(refs, from_session);
    }
}

void SyncEngine::after_graph_change() {
    if (producer_ || cfg_.mode != ManifestMode::Tangle) return;
    start_chunk_fetch();
    check_complete();
}

void SyncEngine::start_chunk_fetch() {
    const TangleGraph* g = graph();
    if (!g || g->empty()) return;
    std::vector<ChunkRef> wanted;
    try {
        wanted = g->resolve_version(VersionSelector::latest());
    } catch (const TangleError&) {
        return;
    }
    for (const auto& c : wanted) {
        if (c.size_bytes == 0) continue;
        auto held = fetched_chunks_.find(c.chunk_name);
        if (held != fetched_chunks_.end() && held->second == c.chunk_hash) continue;
        std::string key = chunk_fetch_name(c).render();
        if (!chunk_pending_.insert(key).second) continue;
        chunk_queue_.push_back(c);
    }
    pump_chunk_window();
}

void SyncEngine::pump_chunk_window() {
    while (chunks_in_flight_ < cfg_.fetch_window && chunk_queue_pos_ < chunk_queue_.size()) {
        ChunkRef c = chunk_queue_[chunk_queue_pos_++];
        ++chunks_in_flight_;
        fetch_chunk(c, 0);
    }
}

void SyncEngine::fetch_chunk(const ChunkRef& chunk, int attempt) {
    Interest i;
    i.name = chunk_fetch_name(chunk);
    node().express_interest(
        std::move(i),
        [this, chunk, attempt](const DataPacket* data, double) {
            if (!data) {
                if (attempt + 1 < cfg_.max_fetch_retries) {
                    fetch_chunk(chunk, attempt + 1);
                } else {
                    --chunks_in_flight_;
                    chunk_pending_.erase(chunk_fetch_name(chunk).render());
                    repair_pending_ = true;
                    pump_chunk_window();
                }
                return;
            }
            --chunks_in_flight_;
            ++stats_.chunks_fetched;
            fetched_chunks_[chunk.chunk_name] = data->content_hash;
            chunk_pending_.erase(chunk_fetch_name(chunk).render());
            fwd().note_chunk_seen(chunk.chunk_name, data->content_hash);
            pump_chunk_window();
            check_complete();
        },
        cfg_.fetch_timeout_s);
}

void SyncEngine::check_complete() {
    if (producer_ || !active_) return;
    if (cfg_.mode == ManifestMode::Flic) {
        flic_check_complete();
        return;
    }
    if (target_version_ == 0 || repair_pending_) return;
    if (!fetching_elements_.empty() || !fetching_bundles_.empty()) return;
    if (chunks_in_flight_ > 0 || chunk_queue_pos_ < chunk_queue_.size()) return;
    if (target_version_ <= completed_version_) return;

    completed_version_ = target_version_;
    if (status_ != SyncStatus::Offline) status_ = SyncStatus::Synced;
    if (completed_version_ > reported_version_) {
        reported_version_ = completed_version_;
        if (on_caught_up) on_caught_up(ndo_, completed_version_, world_.now());
    }
}

// --- notify path ------------------------------------------------------

void SyncEngine::flush_session(Session& s) {
    if (s.state != Session::State::Established) return;
    if (s.queued.empty() && !s.announce) return;

    NotifyMsg msg;
    msg.ndo_name = ndo_;
    msg.version = producer_ ? ndo_version_ : target_version_;
    const TangleGraph* g = graph();
    if (g) {
        msg.tips = advertised_tips(*g);
        for (const auto& id : s.queued)
            if (g->contains(id)) msg.elements.push_back(canonical_encode(g->element(id)));
    }
    s.queued.clear();
    s.announce = false;

    Interest i;
    i.name = tunnel_out(s, {"notify", std::to_string(s.seq++)});
    i.params = msg.encode();
    std::uint64_t nonce = s.nonce;
    ++stats_.notifies_sent;
    node().express_interest(
        std::move(i),
        [this, nonce](const DataPacket* data, double now) {
            if (!data) return; // the poll cadence repairs lost notifies
            auto it = sessions_.find(nonce);
            if (it != sessions_.end()) {
                it->second.last_heard = now;
                it->second.missed_heartbeats = 0;
            }
        },
        cfg_.fetch_timeout_s);
}

void SyncEngine::process_notify(const NotifyMsg& msg, std::uint64_t nonce, double now) {
    ++stats_.notifies_received;
    auto it = sessions_.find(nonce);
    if (it != sessions_.end()) it->second.last_heard = now;

    bool version_news = msg.version > target_version_;
    if (version_news) target_version_ = msg.version;

    if (cfg_.mode == ManifestMode::Flic) {
        if (!producer_ && target_version_ > completed_version_ && target_version_ >= 1)
            flic_start_fetch(target_version_ - 1);
        return;
    }

    for (const auto& enc : msg.elements) ingest_element_bytes(enc, nonce);

    if (!producer_ && version_news)
        for (std::uint64_t v = completed_version_ + 1; v <= target_version_; ++v)
            fetch_bundle(v, 0);

    request_missing(gate_missing_tips(msg.tips), nonce);

    if (version_news) {
        for (auto& [n2, s2] : sessions_) {
            if (n2 == nonce || s2.state != Session::State::Established) continue;
            s2.announce = true;
            flush_session(s2);
        }
    }
    after_graph_change();
}

// --- baseline arm -----------------------------------------------------

void SyncEngine::flic_start_fetch(std::uint64_t generation) {
    // One tree fetch at a time; flic_check_complete chains to a newer
    // generation when one appeared meanwhile.
    if (flic_fetch_active_) return;
    flic_fetch_active_ = true;
    flic_fetching_generation_ = generation;
    flic_fetch_node(flic_root_name(ndo_, generation), generation, 0);
}

void SyncEngine::flic_fetch_node(const std::string& node_name, std::uint64_t generation,
                                 int attempt) {
    if (attempt == 0) ++flic_nodes_in_flight_;
    Interest i;
    i.name = ContentName::parse(node_name);
    node().express_interest(
        std::move(i),
        [this, node_name, generation, attempt](const DataPacket* data, double) {
            if (generation != flic_fetching_generation_) {
                --flic_nodes_in_flight_;
                return;
            }
            if (!data) {
                if (attempt + 1 < cfg_.max_fetch_retries) {
                    flic_fetch_node(node_name, generation, attempt + 1);
                } else {
                    --flic_nodes_in_flight_;
                    repair_pending_ = true;
                }
                return;
            }
            auto n = flic_decode_node(
                std::span<const std::uint8_t>(data->bytes.data(), data->bytes.size()));
            --flic_nodes_in_flight_;
            if (n) flic_on_node(*n, generation);
            flic_check_complete();
        },
        cfg_.fetch_timeout_s);
}

void SyncEngine::flic_on_node(const FlicNode& n, std::uint64_t generation) {
    for (const auto& e : n.entries) {
        if (e.is_manifest) {
            flic_fetch_node(flic_identifier_to_fetch_name(e.identifier), generation, 0);
            continue;
        }
        std::string base = flic_identifier_to_fetch_name(e.identifier);
        flic_chunk_entries_[base] = e;
        auto held = fetched_chunks_.find(base);
        if (held != fetched_chunks_.end() && held->second == e.hash) continue;
        if (!chunk_pending_.insert(e.identifier).second) continue;
        ChunkRef c;
        c.chunk_name = base;
        c.chunk_hash = e.hash;
        c.size_bytes = 1; // real size is learned from the data packet
        chunk_queue_.push_back(c);
    }
    pump_chunk_window();
}

void SyncEngine::flic_check_complete() {
    if (!flic_fetch_active_ || repair_pending_) return;
    if (flic_nodes_in_flight_ > 0) return;
    if (chunks_in_flight_ > 0 || chunk_queue_pos_ < chunk_queue_.size()) return;

    flic_fetch_active_ = false;
    completed_version_ = std::max(completed_version_, flic_fetching_generation_ + 1);
    if (status_ != SyncStatus::Offline) status_ = SyncStatus::Synced;
    if (completed_version_ > reported_version_) {
        reported_version_ = completed_version_;
        if (on_caught_up) on_caught_up(ndo_, completed_version_, world_.now());
    }
    if (target_version_ > completed_version_) flic_start_fetch(target_version_ - 1);
}

// --- serving ----------------------------------------------------------

DataPacket SyncEngine::element_data(const ElementId& id) const {
    const TangleGraph* g = graph();
    DataPacket d;
    d.kind = PayloadKind::TangleElement;
    d.bytes = canonical_encode(g->element(id));
    d.content_hash = sha256(std::span<const std::uint8_t>(d.bytes.data(), d.bytes.size()));
    return d;
}

DataPacket SyncEngine::tip_data(double) {
    TipInfoMsg msg;
    msg.ndo_name = ndo_;
    msg.version = producer_ ? ndo_version_ : completed_version_;
    if (const TangleGraph* g = graph()) msg.tips = advertised_tips(*g);
    DataPacket d;
    d.name = tip_content_name(ndo_, 0, false);
    d.kind = PayloadKind::TipInfo;
    d.bytes = msg.encode();
    d.freshness_s = 0; // tip data is only ever fresh at its source
    return d;
}

DataPacket SyncEngine::control_ack(const ContentName& name) const {
    DataPacket d;
    d.name = name;
    d.kind = PayloadKind::SyncControl;
    d.bytes = {1};
    d.freshness_s = 0;
    return d;
}

std::optional<DataPacket> SyncEngine::answer(const Interest& interest, int in_face,
                                             double now) {
    if (!active_) return std::nullopt;

    if (auto t = parse_sync_tunnel_name(interest.name)) {
        if (t->ndo_name != ndo_) return std::nullopt;
        auto it = sessions_.find(t->nonce);
        if (it == sessions_.end()) return std::nullopt;
        Session& s = it->second;
        char inbound = s.initiated ? 'i' : 'r';
        if (t->dir != inbound) return std::nullopt;

        if (t->verb == "confirm") {
            if (s.state == Session::State::Confirming) {
                s.state = Session::State::Established;
                ++stats_.handshakes_completed;
                s.announce = true; // seed the new partner with our view
            }
            s.last_heard = now;
            return control_ack(interest.name);
        }
        if (t->verb == "heartbeat") {
            s.last_heard = now;
            return control_ack(interest.name);
        }
        if (t->verb == "notify") {
            auto msg = NotifyMsg::decode(
                std::span<const std::uint8_t>(interest.params.data(), interest.params.size()));
            if (msg && msg->ndo_name == ndo_) process_notify(*msg, t->nonce, now);
            return control_ack(interest.name);
        }
        if (t->verb == "el" && !t->rest.empty()) {
            auto id = from_hex(t->rest.front());
            const TangleGraph* g = graph();
            if (id && g && g->contains(*id)) {
                DataPacket d = element_data(*id);
                d.name = interest.name;
                return d;
            }
            return std::nullopt;
        }
        return std::nullopt;
    }

    if (cfg_.mode == ManifestMode::Tangle) {
        if (auto v = parse_bundle_name(interest.name, ndo_)) {
            auto bit = batches_.find(*v);
            if (bit != batches_.end()) {
                const TangleGraph* g = graph();
                ElementBundle bundle;
                for (const auto& id : bit->second)
                    bundle.elements.push_back(canonical_encode(g->element(id)));
                DataPacket d;
                d.name = interest.name;
                d.kind = PayloadKind::TangleElement;
                d.bytes = bundle.encode();
                d.content_hash =
                    sha256(std::span<const std::uint8_t>(d.bytes.data(), d.bytes.size()));
                return d;
            }
            return std::nullopt;
        }

        if (auto p = parse_element_name(interest.name)) {
            if (p->ndo_name == ndo_) {
                const TangleGraph* g = graph();
                if (g && g->contains(p->id)) {
                    DataPacket d = element_data(p->id);
                    d.name = interest.name;
                    return d;
                }
            }
            return std::nullopt;
        }
    }

    if (auto tip = parse_tip_name(interest.name)) {
        // Never answer this node's own poll; offline detection depends on
        // the interest leaving the node.
        bool own_poll = !producer_ && in_face == Forwarder::kAppFace;
        if (!own_poll && tip->ndo_name == ndo_ &&
            (producer_ || status_ == SyncStatus::Synced)) {
            DataPacket d = tip_data(now);
            d.name = interest.name;
            return d;
        }
    }
    return std::nullopt;
}

} // namespace tcn
