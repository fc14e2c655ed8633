#pragma once

#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tcn/packet.hpp"
#include "tcn/rng.hpp"
#include "tcn/tangle.hpp"

namespace tcn {

struct FibEntry {
    ContentName prefix;
    int face = 0;
    double expires_at = kNeverExpires;
    bool provisional = false;
};

// Minimal NDN-style forwarding plane for one node: FIB with longest-prefix
// match and TTL entries, PIT aggregation, LRU content store honoring
// must-be-fresh, and the Manifest Synchronization Table. Owned by the
// single simulation event loop; all interaction is through the hooks.
class Forwarder {
  public:
    static constexpr int kAppFace = -1;

    struct Config {
        std::size_t cs_capacity = 10000;
        double interest_lifetime_s = 4.0;
        double sync_route_ttl_s = 30.0;
    };

    struct Counters {
        std::uint64_t interests_received = 0;
        std::uint64_t interests_sent = 0;
        std::uint64_t data_received = 0;
        std::uint64_t data_sent = 0;
        std::uint64_t data_bytes_received = 0;
        std::uint64_t data_bytes_sent = 0;
        std::uint64_t drops_no_route = 0;
        std::uint64_t drops_unsolicited = 0;
        std::uint64_t drops_duplicate_nonce = 0;
        std::uint64_t pit_aggregated = 0;
        std::uint64_t cs_hits = 0;
        std::uint64_t verification_failures = 0;
        std::uint64_t elements_rejected = 0;
    };

    Forwarder(std::string node_id, Config cfg, Rng* rng)
        : node_id_(std::move(node_id)), cfg_(cfg), rng_(rng) {}

    const std::string& node_id() const { return node_id_; }
    const Config& config() const { return cfg_; }
    Counters& counters() { return counters_; }
    const Counters& counters() const { return counters_; }

    // --- pipeline -----------------------------------------------------
    void on_interest(Interest interest, int in_face, double now);
    void on_data(const DataPacket& data, int in_face, double now);

    // --- FIB ----------------------------------------------------------
    void install_route(const ContentName& prefix, int face, double expires_at,
                       bool provisional = false);
    void expire_routes(double now);
    // Handshake confirmation: flips provisional entries of this exact
    // prefix to persistent with a fresh expiry.
    void confirm_routes(const ContentName& prefix, double expires_at);
    // Heartbeat renewal for all entries with this exact prefix.
    void renew_routes(const ContentName& prefix, double expires_at);
    void drop_routes(const ContentName& prefix);
    std::optional<int> longest_prefix_match(const ContentName& name, int exclude_face,
                                            double now) const;
    const std::vector<FibEntry>& fib() const { return fib_; }

    // --- content store ------------------------------------------------
    const DataPacket* cs_lookup(const ContentName& name, bool must_be_fresh, double now);
    void cs_insert(const DataPacket& data, double now);
    std::size_t cs_size() const { return cs_.size(); }

    // --- MST ------------------------------------------------------------
    // Tangle replicas are stored here, exempt from content store eviction.
    TangleGraph* mst_find(const std::string& tangle_name);
    const TangleGraph* mst_find(const std::string& tangle_name) const;
    TangleGraph& mst_track(TangleGraph graph);
    bool mst_tracks(const std::string& tangle_name) const { return mst_.count(tangle_name); }

    // Insert a received element into the tracked replica and acknowledge
    // every core whose chunk this node has verified. Returns ids of newly
    // appended ack elements. Elements whose references are still missing
    // are pooled and retried automatically.
    std::vector<ElementId> store_in_mst(const std::string& tangle_name, const Element& element);
    // Record a chunk this node forwarded or holds; may trigger deferred
    // acknowledgements for cores waiting on this chunk.
    std::vector<ElementId> note_chunk_seen(const std::string& chunk_name, const Hash256& hash);

    // --- hooks ----------------------------------------------------------
    std::function<void(int out_face, Packet&&)> send;
    // Sync-layer interception; return true when the interest was consumed.
    std::function<bool(const Interest&, int in_face, double now)> special_interest;
    // Producer/app answer for names not in CS.
    std::function<std::optional<DataPacket>(const Interest&, int in_face, double now)> local_app;
    // Data handed up the local application face.
    std::function<void(const DataPacket&, double now)> app_deliver;
    // Observation point for data moving through this node (route install,
    // chunk verification, MST feed).
    std::function<void(const DataPacket&, int in_face, double now)> on_data_passing;
    // New acks appended by the verification rule; sync layer publishes them.
    std::function<void(const std::string& tangle_name, const std::vector<ElementId>&)>
        on_acks_appended;

  private:
    struct PitEntry {
        std::set<int> in_faces;
        double expires_at = 0;
    };
    struct CsEntry {
        DataPacket data;
        double stored_at = 0;
        std::list<std::string>::iterator lru_it;
    };
    struct PendingElement {
        std::string tangle_name;
        Element element;
    };
    struct AwaitingChunk {
        std::string tangle_name;
        ElementId core_id{};
        Hash256 expected_hash{};
    };

    std::string pit_key(const ContentName& name, bool must_be_fresh) const;
    void satisfy_pit(const DataPacket& data, int in_face, double now);
    void maybe_install_tunnel(const DataPacket& data, int in_face, const std::set<int>& out_faces,
                              double now);
    std::vector<ElementId> try_insert_element(const std::string& tangle_name,
                                              const Element& element);
    std::vector<ElementId> ack_if_verified(const std::string& tangle_name, const ElementId& id);
    void drain_pending(const std::string& tangle_name, std::vector<ElementId>& acks_out);

    std::string node_id_;
    Config cfg_;
    Rng* rng_;
    Counters counters_;

    std::vector<FibEntry> fib_;
    std::map<std::string, PitEntry> pit_;
    std::map<std::string, CsEntry> cs_;
    std::list<std::string> cs_lru_; // front = most recent
    std::set<std::pair<std::string, std::uint64_t>> seen_nonces_;

    std::map<std::string, TangleGraph> mst_;
    std::map<std::string, Hash256> seen_chunks_;
    std::map<std::string, AwaitingChunk> awaiting_chunk_;
    std::vector<PendingElement> pending_elements_;
};

} // namespace tcn
