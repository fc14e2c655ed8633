#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tcn/hash.hpp"

namespace tcn {

// Hierarchical content name, rendered with '/' separators.
struct ContentName {
    std::vector<std::string> components;
    bool freshness_required = false;

    static ContentName parse(std::string_view rendered);
    std::string render() const;
    bool is_prefix_of(const ContentName& other) const;

    friend bool operator==(const ContentName& a, const ContentName& b) {
        return a.components == b.components;
    }
    friend auto operator<=>(const ContentName& a, const ContentName& b) {
        return a.components <=> b.components;
    }
};

// <NDO-Tangle-name>/<hash-value>/<version-number>, hash as lowercase hex.
ContentName element_content_name(const std::string& ndo_tangle_name, const Hash256& id,
                                 std::uint64_t version);
struct ParsedElementName {
    std::string ndo_name;
    Hash256 id;
    std::optional<std::uint64_t> version;
};
std::optional<ParsedElementName> parse_element_name(const ContentName& name);

// <NDO-name>/<version-number>
ContentName tip_content_name(const std::string& ndo_name, std::uint64_t version,
                             bool freshness_required = false);
struct ParsedTipName {
    std::string ndo_name;
    std::uint64_t version;
};
std::optional<ParsedTipName> parse_tip_name(const ContentName& name);

// <NDO-name>/sync/<nonce>/<r|i>: hop-by-hop tunnel prefix of one sync
// session, 'r' pointing toward the responder and 'i' toward the initiator.
// Verbs (confirm, heartbeat, notify, el, ...) follow as components.
ContentName sync_tunnel_prefix(const std::string& ndo_name, std::uint64_t nonce, char dir);
struct ParsedSyncTunnelName {
    std::string ndo_name;
    std::uint64_t nonce = 0;
    char dir = 'r';
    std::string verb;               // first component after the direction
    std::vector<std::string> rest;  // components after the verb
    ContentName r_prefix;
    ContentName i_prefix;
};
std::optional<ParsedSyncTunnelName> parse_sync_tunnel_name(const ContentName& name);

// <Tangle-name>/<nonce>/findsyncpartner
ContentName sync_partner_name(const std::string& tangle_name, std::uint64_t nonce);
struct ParsedSyncPartnerName {
    std::string tangle_name;
    std::uint64_t nonce;
};
std::optional<ParsedSyncPartnerName> parse_sync_partner_name(const ContentName& name);

} // namespace tcn
