#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcn/element.hpp"
#include "tcn/rng.hpp"
#include "tcn/wire.hpp"

namespace tcn {

enum class TangleErrc {
    MissingReference,
    UnknownChunk,
    InvalidTarget,
    InvalidVersion,
    InvalidChunk,
    CorruptGraph,
};

struct TangleError : std::runtime_error {
    TangleError(TangleErrc c, const std::string& what) : std::runtime_error(what), code(c) {}
    TangleErrc code;
};

struct VersionSelector {
    enum class Kind { Latest, Initial, Exact };
    Kind kind = Kind::Latest;
    std::int64_t k = 0;

    static VersionSelector latest() { return {Kind::Latest, 0}; }
    static VersionSelector initial() { return {Kind::Initial, 0}; }
    static VersionSelector exact(std::int64_t k) { return {Kind::Exact, k}; }
};

// Forward stream view over the core elements, in the reverse order of the
// tips-to-genesis traversal. Supports 'next element' queries for streaming.
struct LogicalView {
    struct Entry {
        std::string chunk_name;
        std::uint64_t version;
        ElementId id;
    };
    std::vector<Entry> stream;
    std::map<std::string, std::uint64_t> latest_version;

    std::optional<Entry> next_after(std::size_t pos) const {
        return pos + 1 < stream.size() ? std::optional<Entry>(stream[pos + 1]) : std::nullopt;
    }
};

// Append-only DAG of core and acknowledgement elements for one NDO.
// Single writer; value-like, safe to copy and hand off.
class TangleGraph {
  public:
    explicit TangleGraph(std::string ndo_name,
                         const SignatureScheme& scheme = mock_signature_scheme());

    static TangleGraph genesis(std::string ndo_name, const ChunkRef& first_chunk,
                               const std::string& origin,
                               const SignatureScheme& scheme = mock_signature_scheme());

    const std::string& ndo_name() const { return ndo_name_; }
    std::size_t size() const { return elements_.size(); }
    bool empty() const { return elements_.empty(); }
    bool contains(const ElementId& id) const { return elements_.count(id) != 0; }
    bool was_pruned(const ElementId& id) const { return pruned_.count(id) != 0; }
    const Element& element(const ElementId& id) const;
    // Ids in insertion order.
    const std::vector<ElementId>& insertion_order() const { return order_; }

    ElementId append_core(const ChunkRef& chunk, const ElementId& primary_target,
                          const std::string& origin, Rng& rng);
    ElementId append_version(const std::string& chunk_name, const ChunkRef& new_chunk,
                             const std::string& origin, Rng& rng);
    // Returns nullopt when the (origin, target) pair already acknowledged, or
    // when the graph is too small to pick a distinct random reference.
    std::optional<ElementId> append_ack(const ElementId& target, const std::string& origin,
                                        Rng& rng);

    // Replica-side insertion of a received element. References must already
    // resolve; duplicates are idempotent. Returns the element id.
    ElementId insert(Element e);
    // Mechanical insertion without invariant checks, for dump loading and
    // integrity testing; validate() is the oracle afterwards.
    void inject_raw(const ElementId& claimed_id, Element e);

    const std::set<ElementId>& tips() const { return tips_; }
    static std::set<ElementId> merge_tips(const std::set<ElementId>& local,
                                          const std::set<ElementId>& remote);

    std::size_t verification_degree(const ElementId& id) const;
    bool consensus_reached(const ElementId& id, std::size_t n_sync_nodes,
                           double quorum_fraction = 0.5) const;

    std::vector<ElementId> traverse_backward(const std::set<ElementId>& from) const;
    LogicalView build_logical_view() const;
    std::vector<ChunkRef> resolve_version(const VersionSelector& sel) const;
    std::optional<ElementId> element_for_chunk_version(const std::string& chunk_name,
                                                      std::uint64_t version) const;
    std::vector<std::uint64_t> list_versions(const std::string& chunk_name) const;
    // Highest-version element of a chunk name, if any.
    std::optional<ElementId> latest_version_element(const std::string& chunk_name) const;
    // Newest core element in insertion order (append target for new chunks).
    std::optional<ElementId> latest_core() const;

    // Throws TangleError{CorruptGraph} on the first violated check.
    void validate(bool pruned_tolerant = false) const;

    void drop_stale(std::uint64_t keep_versions);

  private:
    struct Stored {
        Element element;
        std::uint64_t index;
    };

    ElementId pick_random_other(const ElementId& excluded, Rng& rng) const;
    ElementId insert_checked(Element e);
    void index_element(const ElementId& id, const Element& e);
    bool ref_resolves(const ElementId& id, bool pruned_tolerant) const;
    void rebuild_derived_state();

    std::string ndo_name_;
    const SignatureScheme* scheme_;
    std::map<ElementId, Stored> elements_;
    std::vector<ElementId> order_;
    std::map<ElementId, std::set<ElementId>> incoming_;
    std::set<ElementId> tips_;
    // acked element -> origins that acknowledged it
    std::map<ElementId, std::set<std::string>> ack_origins_;
    // chunk name -> version -> element id
    std::map<std::string, std::map<std::uint64_t, ElementId>> versions_;
    std::set<ElementId> pruned_;
    std::uint64_t next_index_ = 0;
};

} // namespace tcn
