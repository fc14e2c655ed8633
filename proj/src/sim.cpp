#include "tcn/sim.hpp"

#include <cassert>
#include <queue>

namespace tcn {

double transmit(LinkDir& dir, std::uint64_t bytes, double now) {
    double start = std::max(now, dir.busy_until);
    double serialize = static_cast<double>(bytes) / dir.bandwidth_Bps;
    dir.busy_until = start + serialize;
    dir.bytes_sent += bytes;
    ++dir.packets_sent;
    return start + serialize + dir.latency_s;
}

Node::Node(SimWorld* world, int id, Forwarder::Config cfg, Rng* rng)
    : world_(world), id_(id), fwd_("node" + std::to_string(id), cfg, rng) {
    fwd_.send = [this](int out_face, Packet&& p) {
        world_->send_from(id_, out_face, std::move(p));
    };
    fwd_.app_deliver = [this](const DataPacket& d, double now) { deliver_app(d, now); };
    fwd_.local_app = [this](const Interest& i, int in_face, double now) {
        return answer_local(i, in_face, now);
    };
}

void Node::express_interest(Interest interest, FetchCallback cb,
                            std::optional<double> timeout_s) {
    std::string key = interest.name.render();
    std::uint64_t token = next_token_++;
    pending_fetches_[key].push_back(PendingFetch{token, std::move(cb)});
    double timeout = timeout_s.value_or(fwd_.config().interest_lifetime_s);
    world_->schedule(timeout,
                     [this, key, token] { fetch_timeout(key, token, world_->now()); });
    if (interest.nonce == 0) interest.nonce = world_->next_nonce();
    fwd_.on_interest(std::move(interest), Forwarder::kAppFace, world_->now());
}

void Node::deliver_app(const DataPacket& data, double now) {
    auto it = pending_fetches_.find(data.name.render());
    if (it == pending_fetches_.end()) return;
    std::vector<PendingFetch> waiters = std::move(it->second);
    pending_fetches_.erase(it);
    for (auto& w : waiters) w.cb(&data, now);
}

void Node::fetch_timeout(const std::string& key, std::uint64_t token, double now) {
    auto it = pending_fetches_.find(key);
    if (it == pending_fetches_.end()) return;
    auto& waiters = it->second;
    auto w = std::find_if(waiters.begin(), waiters.end(),
                          [token](const PendingFetch& p) { return p.token == token; });
    if (w == waiters.end()) return;
    FetchCallback cb = std::move(w->cb);
    waiters.erase(w);
    if (waiters.empty()) pending_fetches_.erase(it);
    cb(nullptr, now);
}

void Node::serve_chunk(const std::string& chunk_name, const Hash256& hash,
                       std::uint64_t size_bytes) {
    served_chunks_[chunk_name] = ServedChunk{hash, size_bytes};
    fwd_.note_chunk_seen(chunk_name, hash);
}

void Node::serve_data(DataPacket data) {
    served_data_[data.name.render()] = std::move(data);
}

bool Node::has_served_chunk(const std::string& chunk_name) const {
    return served_chunks_.count(chunk_name) > 0;
}

std::optional<DataPacket> Node::answer_local(const Interest& interest, int in_face, double now) {
    std::string key = interest.name.render();
    if (auto it = served_chunks_.find(key); it != served_chunks_.end()) {
        DataPacket d;
        d.name = interest.name;
        d.kind = PayloadKind::Chunk;
        d.virtual_payload_bytes = it->second.size_bytes;
        d.content_hash = it->second.hash;
        d.signature.assign(32, 0);
        return d;
    }
    if (auto it = served_data_.find(key); it != served_data_.end()) return it->second;
    if (app_answer) return app_answer(interest, in_face, now);
    return std::nullopt;
}

SimWorld::SimWorld(const Topology& topo, std::uint64_t seed, Forwarder::Config node_cfg)
    : topo_(topo), rng_(seed) {
    faces_.resize(topo.n_nodes);
    link_up_.assign(topo.links.size(), 1);
    link_dirs_.resize(topo.links.size());
    for (int li = 0; li < static_cast<int>(topo.links.size()); ++li) {
        const LinkSpec& l = topo.links[li];
        for (int d = 0; d < 2; ++d) {
            link_dirs_[li][d].bandwidth_Bps = l.bandwidth_Bps;
            link_dirs_[li][d].latency_s = l.latency_s;
        }
        int fa = static_cast<int>(faces_[l.a].size());
        int fb = static_cast<int>(faces_[l.b].size());
        faces_[l.a].push_back(FaceRec{li, 0, l.b, fb});
        faces_[l.b].push_back(FaceRec{li, 1, l.a, fa});
    }
    nodes_.reserve(topo.n_nodes);
    for (int i = 0; i < topo.n_nodes; ++i)
        nodes_.push_back(std::make_unique<Node>(this, i, node_cfg, &rng_));
}

void SimWorld::schedule(double delay, std::function<void()> fn) {
    schedule_at(now_ + delay, std::move(fn));
}

void SimWorld::schedule_at(double t, std::function<void()> fn) {
    assert(t >= now_ && "event scheduled in the past");
    queue_.push(Event{t, next_seq_++, std::move(fn)});
}

void SimWorld::run_until(double t_end) {
    while (!queue_.empty() && queue_.top().time <= t_end) {
        Event ev = queue_.top();
        queue_.pop();
        now_ = ev.time;
        ev.fn();
    }
    now_ = std::max(now_, t_end);
}

bool SimWorld::run_until_idle(double hard_limit) {
    while (!queue_.empty()) {
        if (queue_.top().time > hard_limit) return false;
        Event ev = queue_.top();
        queue_.pop();
        now_ = ev.time;
        ev.fn();
    }
    return true;
}

void SimWorld::send_from(int node_id, int out_face, Packet&& packet) {
    if (!nodes_[node_id]->online_) return;
    const FaceRec& rec = faces_[node_id].at(out_face);
    LinkDir& dir = link_dirs_[rec.link][rec.dir];
    if (!link_up_[rec.link]) {
        ++dir.drops;
        return;
    }
    std::size_t bytes = packet_wire_size(packet);
    if (const auto* d = std::get_if<DataPacket>(&packet))
        traffic_.data_bytes[static_cast<int>(d->kind)] += bytes;
    else
        traffic_.interest_bytes += bytes;
    double arrival = transmit(dir, bytes, now_);
    int li = rec.link, peer = rec.peer, peer_face = rec.peer_face;
    schedule_at(arrival, [this, li, peer, peer_face, p = std::move(packet)]() mutable {
        if (!link_up_[li] || !nodes_[peer]->online_) {
            ++link_dirs_[li][0].drops;
            return;
        }
        Node& n = *nodes_[peer];
        if (auto* i = std::get_if<Interest>(&p))
            n.fwd_.on_interest(std::move(*i), peer_face, now_);
        else
            n.fwd_.on_data(std::get<DataPacket>(p), peer_face, now_);
    });
}

void SimWorld::set_node_online(int node_id, bool online) {
    nodes_[node_id]->online_ = online;
}

void SimWorld::set_link_up(int link_index, bool up) {
    link_up_.at(link_index) = up ? 1 : 0;
}

int SimWorld::peer_of(int node_id, int face) const { return faces_[node_id].at(face).peer; }

int SimWorld::face_count(int node_id) const {
    return static_cast<int>(faces_[node_id].size());
}

std::optional<int> SimWorld::face_toward(int from, int to) const {
    if (from == to) return std::nullopt;
    // BFS from `to` so every node learns its first hop toward it.
    std::vector<int> prev_face(nodes_.size(), -1);
    std::vector<char> seen(nodes_.size(), 0);
    std::queue<int> q;
    q.push(to);
    seen[to] = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        if (u == from) break;
        for (int f = 0; f < static_cast<int>(faces_[u].size()); ++f) {
            int v = faces_[u][f].peer;
            if (seen[v]) continue;
            seen[v] = 1;
            prev_face[v] = faces_[u][f].peer_face;
            q.push(v);
        }
    }
    if (!seen[from] || prev_face[from] < 0) return std::nullopt;
    return prev_face[from];
}

void SimWorld::install_routes_toward(int producer, const ContentName& prefix) {
    for (int i = 0; i < n_nodes(); ++i) {
        if (i == producer) continue;
        if (auto f = face_toward(i, producer))
            nodes_[i]->fwd_.install_route(prefix, *f, kNeverExpires);
    }
}

std::uint64_t SimWorld::total_link_bytes() const {
    std::uint64_t total = 0;
    for (const auto& dirs : link_dirs_)
        total += dirs[0].bytes_sent + dirs[1].bytes_sent;
    return total;
}

} // namespace tcn
