#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tcn/flic.hpp"
#include "tcn/sim.hpp"
#include "tcn/sync_wire.hpp"
#include "tcn/tangle.hpp"

namespace tcn {

enum class ManifestMode { Tangle, Flic };
enum class UpdateMode { Version, Append };
enum class SyncStatus { Idle, Bootstrapping, Synced, Offline };

struct SyncConfig {
    ManifestMode mode = ManifestMode::Tangle;
    double route_ttl_s = 30.0;
    double provisional_ttl_s = 5.0;
    // TTL / 3, so two heartbeats can be lost before routes decay.
    double heartbeat_interval_s = 10.0;
    int heartbeat_miss_limit = 3;
    // Poll cadence; acknowledgement gossip is coalesced to this.
    double poll_interval_s = 1.0;
    double fetch_timeout_s = 0.5;
    int max_fetch_retries = 8;
    int fetch_window = 16;
    // Consecutive failed tip polls before the session is declared offline.
    int offline_poll_failures = 5;
    double quorum = 0.5;
    std::uint32_t flic_fanout = kDefaultFlicFanout;
};

// Synchronization engine for one NDO on one node. A producer publishes the
// manifest and answers discovery; a subscriber bootstraps the replica,
// keeps a sync partner session over a hop-by-hop tunnel, and repairs any
// divergence at the poll cadence.
class SyncEngine {
  public:
    SyncEngine(SimWorld& world, int node_id, SyncConfig cfg = {});
    ~SyncEngine();
    SyncEngine(const SyncEngine&) = delete;
    SyncEngine& operator=(const SyncEngine&) = delete;

    void become_producer(const std::string& ndo_name);
    // Genesis anchor element plus one core element per chunk; version 1.
    void publish_initial(const std::vector<ChunkRef>& chunks);
    // New version: Version mode replaces the chunks' content in place,
    // Append extends the NDO. Returns the published version number.
    std::uint64_t publish_update(UpdateMode update, const std::vector<ChunkRef>& chunks);

    void subscribe(const std::string& ndo_name);

    bool is_producer() const { return producer_; }
    const std::string& ndo_name() const { return ndo_; }
    SyncStatus status() const { return status_; }
    std::uint64_t ndo_version() const { return ndo_version_; }
    std::uint64_t completed_version() const { return completed_version_; }
    std::size_t established_sessions() const;
    TangleGraph* graph();
    const TangleGraph* graph() const;
    const std::map<std::string, Hash256>& fetched_chunks() const { return fetched_chunks_; }
    const SyncConfig& config() const { return cfg_; }
    // Producer's full current chunk list (latest versions).
    const std::map<std::string, ChunkRef>& published_chunks() const { return chunks_; }

    // Fires each time the replica catches up with a newly seen version.
    std::function<void(const std::string& ndo, std::uint64_t version, double now)> on_caught_up;

    struct Stats {
        std::uint64_t tip_polls = 0;
        std::uint64_t tip_poll_failures = 0;
        std::uint64_t notifies_sent = 0;
        std::uint64_t notifies_received = 0;
        std::uint64_t elements_fetched = 0;
        std::uint64_t bundles_fetched = 0;
        std::uint64_t chunks_fetched = 0;
        std::uint64_t sessions_dropped = 0;
        std::uint64_t handshakes_completed = 0;
    };
    const Stats& stats() const { return stats_; }

  private:
    struct Session {
        std::uint64_t nonce = 0;
        bool initiated = false; // this side sent findsyncpartner
        enum class State { Discovering, Confirming, Established } state = State::Discovering;
        double last_heard = 0;
        int missed_heartbeats = 0;
        std::uint64_t seq = 0;
        std::set<ElementId> queued; // elements to gossip at the next flush
        bool announce = false;      // version/tip change to push immediately
    };

    Node& node();
    Forwarder& fwd();
    ContentName tunnel_out(const Session& s, std::initializer_list<std::string> verbs);

    // discovery / handshake
    void start_discovery();
    void on_offer(const DataPacket& data, double now);
    void send_confirm(std::uint64_t nonce, int attempt);
    bool answer_findsyncpartner(const Interest& interest, int in_face, double now);
    void drop_session(std::uint64_t nonce);
    void heartbeat_tick(std::uint64_t nonce);

    // reconciliation
    void poll_tick();
    void poll_tips();
    void on_tip_info(const TipInfoMsg& msg, double now);
    std::vector<ElementId> gate_missing_tips(const std::vector<ElementId>& tips);
    void request_missing(const std::vector<ElementId>& ids, std::optional<std::uint64_t> via);
    void fetch_element(const ElementId& id, std::optional<std::uint64_t> via, int attempt);
    void fetch_bundle(std::uint64_t version, int attempt);
    void ingest_element_bytes(const std::vector<std::uint8_t>& enc,
                              std::optional<std::uint64_t> from_session);
    void after_graph_change();
    void start_chunk_fetch();
    void pump_chunk_window();
    void fetch_chunk(const ChunkRef& chunk, int attempt);
    void check_complete();

    // notify path
    void flush_session(Session& s);
    void process_notify(const NotifyMsg& msg, std::uint64_t nonce, double now);

    // baseline arm
    void flic_publish(std::uint64_t generation);
    void flic_start_fetch(std::uint64_t generation);
    void flic_fetch_node(const std::string& node_name, std::uint64_t generation, int attempt);
    void flic_on_node(const FlicNode& node, std::uint64_t generation);
    void flic_check_complete();

    // serving
    std::optional<DataPacket> answer(const Interest& interest, int in_face, double now);
    DataPacket element_data(const ElementId& id) const;
    DataPacket tip_data(double now);
    DataPacket control_ack(const ContentName& name) const;

    SimWorld& world_;
    int node_id_;
    SyncConfig cfg_;
    bool producer_ = false;
    bool active_ = false;
    std::string ndo_;
    SyncStatus status_ = SyncStatus::Idle;
    std::uint64_t ndo_version_ = 0;
    std::uint64_t target_version_ = 0;
    std::uint64_t completed_version_ = 0;
    std::uint64_t reported_version_ = 0;
    int consecutive_poll_failures_ = 0;
    Stats stats_;

    std::map<std::uint64_t, Session> sessions_;
    std::map<std::string, ChunkRef> chunks_; // producer: latest chunk set
    // version -> delta element ids, in append order (bundle serving)
    std::map<std::uint64_t, std::vector<ElementId>> batches_;

    std::set<ElementId> fetching_elements_;
    std::set<ElementId> tips_missing_last_poll_;
    std::set<std::uint64_t> fetching_bundles_;
    std::map<std::string, Hash256> fetched_chunks_; // chunk name -> hash held
    std::vector<ChunkRef> chunk_queue_;
    std::size_t chunk_queue_pos_ = 0;
    int chunks_in_flight_ = 0;
    std::set<std::string> chunk_pending_; // queued or in flight, by fetch name
    // A fetch ran out of retries; completion is blocked until the next
    // successful poll restarts reconciliation.
    bool repair_pending_ = false;

    // baseline arm state
    std::optional<FlicManifest> flic_;
    std::uint64_t flic_generation_ = 0; // last fully fetched generation + 1 on producer
    std::map<std::string, FlicEntry> flic_chunk_entries_;
    int flic_nodes_in_flight_ = 0;
    std::uint64_t flic_fetching_generation_ = 0;
    bool flic_fetch_active_ = false;
};

} // namespace tcn
