#include "tcn/names.hpp"

#include <charconv>

namespace tcn {

namespace {

std::optional<std::uint64_t> parse_decimal(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string join_prefix(const std::vector<std::string>& comps, std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        out += '/';
        out += comps[i];
    }
    return out;
}

} // namespace

ContentName ContentName::parse(std::string_view rendered) {
    ContentName name;
    std::size_t pos = 0;
    while (pos < rendered.size()) {
        if (rendered[pos] == '/') {
            ++pos;
            continue;
        }
        std::size_t next = rendered.find('/', pos);
        if (next == std::string_view::npos) next = rendered.size();
        name.components.emplace_back(rendered.substr(pos, next - pos));
        pos = next;
    }
    return name;
}

std::string ContentName::render() const {
    return join_prefix(components, components.size());
}

bool ContentName::is_prefix_of(const ContentName& other) const {
    if (components.size() > other.components.size()) return false;
    for (std::size_t i = 0; i < components.size(); ++i)
        if (components[i] != other.components[i]) return false;
    return true;
}

ContentName element_content_name(const std::string& ndo_tangle_name, const Hash256& id,
                                 std::uint64_t version) {
    ContentName name = ContentName::parse(ndo_tangle_name);
    name.components.push_back(to_hex(id));
    name.components.push_back(std::to_string(version));
    return name;
}

std::optional<ParsedElementName> parse_element_name(const ContentName& name) {
    // <ndo>/<hex>/<version> or <ndo>/<hex> when the version is unknown.
    const auto& c = name.components;
    for (std::size_t i = c.size(); i-- > 1;) {
        auto id = from_hex(c[i]);
        if (!id) continue;
        ParsedElementName out;
        out.ndo_name = join_prefix(c, i);
        out.id = *id;
        if (i + 1 < c.size()) {
            auto v = parse_decimal(c[i + 1]);
            if (!v || i + 2 != c.size()) return std::nullopt;
            out.version = v;
        }
        return out;
    }
    return std::nullopt;
}

ContentName tip_content_name(const std::string& ndo_name, std::uint64_t version,
                             bool freshness_required) {
    ContentName name = ContentName::parse(ndo_name);
    name.components.push_back(std::to_string(version));
    name.freshness_required = freshness_required;
    return name;
}

std::optional<ParsedTipName> parse_tip_name(const ContentName& name) {
    const auto& c = name.components;
    if (c.size() < 2) return std::nullopt;
    auto v = parse_decimal(c.back());
    if (!v) return std::nullopt;
    return ParsedTipName{join_prefix(c, c.size() - 1), *v};
}

ContentName sync_tunnel_prefix(const std::string& ndo_name, std::uint64_t nonce, char dir) {
    ContentName name = ContentName::parse(ndo_name);
    name.components.push_back("sync");
    name.components.push_back(std::to_string(nonce));
    name.components.push_back(std::string(1, dir));
    return name;
}

std::optional<ParsedSyncTunnelName> parse_sync_tunnel_name(const ContentName& name) {
    const auto& c = name.components;
    // Rightmost "sync"/<nonce>/<r|i> wins, tolerating 'sync' inside NDO names.
    for (std::size_t i = c.size(); i-- > 1;) {
        if (c[i] != "sync" || i + 2 >= c.size()) continue;
        auto nonce = parse_decimal(c[i + 1]);
        if (!nonce) continue;
        if (c[i + 2] != "r" && c[i + 2] != "i") continue;
        ParsedSyncTunnelName out;
        out.ndo_name = join_prefix(c, i);
        out.nonce = *nonce;
        out.dir = c[i + 2][0];
        if (i + 3 < c.size()) out.verb = c[i + 3];
        for (std::size_t j = i + 4; j < c.size(); ++j) out.rest.push_back(c[j]);
        out.r_prefix = sync_tunnel_prefix(out.ndo_name, out.nonce, 'r');
        out.i_prefix = sync_tunnel_prefix(out.ndo_name, out.nonce, 'i');
        return out;
    }
    return std::nullopt;
}

ContentName sync_partner_name(const std::string& tangle_name, std::uint64_t nonce) {
    ContentName name = ContentName::parse(tangle_name);
    name.components.push_back(std::to_string(nonce));
    name.components.push_back("findsyncpartner");
    return name;
}

std::optional<ParsedSyncPartnerName> parse_sync_partner_name(const ContentName& name) {
    const auto& c = name.components;
    if (c.size() < 3 || c.back() != "findsyncpartner") return std::nullopt;
    auto nonce = parse_decimal(c[c.size() - 2]);
    if (!nonce) return std::nullopt;
    return ParsedSyncPartnerName{join_prefix(c, c.size() - 2), *nonce};
}

} // namespace tcn
