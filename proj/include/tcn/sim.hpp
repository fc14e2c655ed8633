#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "tcn/forwarder.hpp"
#include "tcn/packet.hpp"
#include "tcn/rng.hpp"
#include "tcn/topology.hpp"

namespace tcn {

class SimWorld;

// One direction of a point-to-point link: a FIFO pipe with a serialization
// stage (bytes / bandwidth) followed by fixed propagation latency.
struct LinkDir {
    double bandwidth_Bps = 0;
    double latency_s = 0;
    double busy_until = 0;
    std::uint64_t bytes_sent = 0;
    std::uint64_t packets_sent = 0;
    std::uint64_t drops = 0;
};

// Returns the arrival time of a packet of `bytes` handed to the pipe at
// `now`, and advances the pipe's busy horizon. 50 KB over 10 MBps with 1 ms
// latency arrives 6.0 ms after an idle start.
double transmit(LinkDir& dir, std::uint64_t bytes, double now);

class Node {
  public:
    Node(SimWorld* world, int id, Forwarder::Config cfg, Rng* rng);

    int id() const { return id_; }
    Forwarder& fwd() { return fwd_; }
    const Forwarder& fwd() const { return fwd_; }
    bool online() const { return online_; }

    // Issue an interest from the local application. The callback fires once,
    // with the data packet or nullptr on timeout.
    using FetchCallback = std::function<void(const DataPacket*, double now)>;
    void express_interest(Interest interest, FetchCallback cb,
                          std::optional<double> timeout_s = std::nullopt);

    // Producer-side stores served through Forwarder::local_app.
    void serve_chunk(const std::string& chunk_name, const Hash256& hash,
                     std::uint64_t size_bytes);
    void serve_data(DataPacket data);
    bool has_served_chunk(const std::string& chunk_name) const;

    // Application-layer answer for interests the stores above miss; the
    // sync engine hangs its producer/serving logic here.
    std::function<std::optional<DataPacket>(const Interest&, int in_face, double now)> app_answer;

  private:
    friend class SimWorld;

    struct PendingFetch {
        std::uint64_t token;
        FetchCallback cb;
    };

    void deliver_app(const DataPacket& data, double now);
    void fetch_timeout(const std::string& key, std::uint64_t token, double now);
    std::optional<DataPacket> answer_local(const Interest& interest, int in_face, double now);

    SimWorld* world_;
    int id_;
    Forwarder fwd_;
    bool online_ = true;

    std::map<std::string, std::vector<PendingFetch>> pending_fetches_;
    std::uint64_t next_token_ = 1;

    struct ServedChunk {
        Hash256 hash{};
        std::uint64_t size_bytes = 0;
    };
    std::map<std::string, ServedChunk> served_chunks_;
    std::map<std::string, DataPacket> served_data_;
};

// Deterministic discrete-event world: one event queue, ties broken by
// insertion order. Packet delivery, timers, and link state all go through
// here; nothing in the protocol stack reads a wall clock.
class SimWorld {
  public:
    SimWorld(const Topology& topo, std::uint64_t seed,
             Forwarder::Config node_cfg = Forwarder::Config{});

    double now() const { return now_; }
    Rng& rng() { return rng_; }
    std::uint64_t next_nonce() { return next_nonce_++; }

    int n_nodes() const { return static_cast<int>(nodes_.size()); }
    Node& node(int id) { return *nodes_.at(id); }
    const Node& node(int id) const { return *nodes_.at(id); }

    void schedule(double delay, std::function<void()> fn);
    void schedule_at(double t, std::function<void()> fn);
    // Runs all events with time <= t_end; clock ends at t_end.
    void run_until(double t_end);
    // Runs until the queue drains or the hard limit is hit; returns false on
    // the limit.
    bool run_until_idle(double hard_limit);

    void send_from(int node_id, int out_face, Packet&& packet);
    void set_node_online(int node_id, bool online);
    void set_link_up(int link_index, bool up);

    // Neighbor node reached through a face.
    int peer_of(int node_id, int face) const;
    int face_count(int node_id) const;
    // Face of `from` on its shortest path toward `to`; BFS, deterministic.
    std::optional<int> face_toward(int from, int to) const;
    // Installs `prefix -> face_toward(producer)` on every node but the
    // producer itself.
    void install_routes_toward(int producer, const ContentName& prefix);

    std::uint64_t total_link_bytes() const;
    const Topology& topology() const { return topo_; }

    // Link-level byte accounting, split by payload kind. Observed by the
    // measurement harness, not by any protocol logic.
    struct Traffic {
        std::uint64_t interest_bytes = 0;
        std::array<std::uint64_t, 6> data_bytes{}; // indexed by PayloadKind

        std::uint64_t data_total() const {
            std::uint64_t t = 0;
            for (auto b : data_bytes) t += b;
            return t;
        }
        // Bytes spent moving manifest structure: tangle elements, tree
        // manifest nodes, and tip information.
        std::uint64_t manifest_bytes() const {
            return data_bytes[static_cast<int>(PayloadKind::TangleElement)] +
                   data_bytes[static_cast<int>(PayloadKind::FlicNode)] +
                   data_bytes[static_cast<int>(PayloadKind::TipInfo)];
        }
        Traffic operator-(const Traffic& o) const {
            Traffic d;
            d.interest_bytes = interest_bytes - o.interest_bytes;
            for (std::size_t i = 0; i < data_bytes.size(); ++i)
                d.data_bytes[i] = data_bytes[i] - o.data_bytes[i];
            return d;
        }
    };
    const Traffic& traffic() const { return traffic_; }

  private:
    struct FaceRec {
        int link = 0;
        int dir = 0; // 0: a->b, 1: b->a
        int peer = 0;
        int peer_face = 0;
    };
    struct Event {
        double time;
        std::uint64_t seq;
        std::function<void()> fn;
        bool operator>(const Event& o) const {
            return time != o.time ? time > o.time : seq > o.seq;
        }
    };

    Topology topo_;
    Rng rng_;
    double now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t next_nonce_ = 1;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;

    std::vector<std::unique_ptr<Node>> nodes_;
    std::vector<std::vector<FaceRec>> faces_; // per node
    std::vector<std::array<LinkDir, 2>> link_dirs_;
    std::vector<char> link_up_;
    Traffic traffic_;
};

} // namespace tcn
