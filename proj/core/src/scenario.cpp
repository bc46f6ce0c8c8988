#include "wsnsec/harness/scenario.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace wsnsec::harness {

using nlohmann::json;

std::string_view to_string(ProtocolKind p) noexcept {
    switch (p) {
        case ProtocolKind::Undefended: return "undefended";
        case ProtocolKind::FrqFrp: return "frq_frp";
        case ProtocolKind::DriGrayhole: return "dri_grayhole";
        case ProtocolKind::Nms: return "nms";
        case ProtocolKind::Multipath2: return "multipath2";
    }
    return "?";
}

std::optional<ProtocolKind> parse_protocol(std::string_view name) noexcept {
    for (auto p : {ProtocolKind::Undefended, ProtocolKind::FrqFrp, ProtocolKind::DriGrayhole, ProtocolKind::Nms,
                   ProtocolKind::Multipath2}) {
        if (to_string(p) == name) return p;
    }
    return std::nullopt;
}

namespace {

std::string join(const std::string& base, std::string_view leaf) {
    return base.empty() ? std::string(leaf) : base + "." + std::string(leaf);
}

/// Typed access to one JSON object that remembers where it sits in the
/// document and rejects keys nobody asked about.
class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ScenarioError(path_, "expected an object");
    }

    const std::string& path() const { return path_; }
    bool has(std::string_view key) const { return node_.contains(std::string(key)); }

    const json& raw(std::string_view key) {
        seen_.insert(std::string(key));
        return node_.at(std::string(key));
    }

    std::string at(std::string_view key) const { return join(path_, key); }

    template <typename Int>
    Int integer(std::string_view key, Int fallback, bool required = false, std::int64_t lo = 0,
                std::int64_t hi = std::numeric_limits<std::int64_t>::max()) {
        if (!has(key)) {
            if (required) throw ScenarioError(at(key), "required field is missing");
            return fallback;
        }
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ScenarioError(at(key), "expected an integer");
        if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(hi)) {
            throw ScenarioError(at(key), "out of range");
        }
        const auto x = v.get<std::int64_t>();
        if (x < lo || x > hi) {
            throw ScenarioError(at(key), "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
        return static_cast<Int>(x);
    }

    std::uint64_t unsigned64(std::string_view key, bool required) {
        if (!has(key)) {
            if (required) throw ScenarioError(at(key), "required field is missing");
            return 0;
        }
        const json& v = raw(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            throw ScenarioError(at(key), "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    double number(std::string_view key, double fallback, double lo, double hi) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_number()) throw ScenarioError(at(key), "expected a number");
        const double x = v.get<double>();
        if (!(x >= lo && x <= hi)) {
            std::ostringstream os;
            os << "must be in [" << lo << ", " << hi << "]";
            throw ScenarioError(at(key), os.str());
        }
        return x;
    }

    bool boolean(std::string_view key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_boolean()) throw ScenarioError(at(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(std::string_view key, std::string fallback, bool required = false) {
        if (!has(key)) {
            if (required) throw ScenarioError(at(key), "required field is missing");
            return fallback;
        }
        const json& v = raw(key);
        if (!v.is_string()) throw ScenarioError(at(key), "expected a string");
        return v.get<std::string>();
    }

    const json& array(std::string_view key) {
        const json& v = raw(key);
        if (!v.is_array()) throw ScenarioError(at(key), "expected an array");
        return v;
    }

    void finish() const {
        for (const auto& [k, _] : node_.items()) {
            if (!seen_.contains(k)) throw ScenarioError(join(path_, k), "unknown field");
        }
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

NodeId node_id(const json& v, const std::string& path, std::size_t n) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ScenarioError(path, "expected a node id");
    const auto id = v.get<std::uint64_t>();
    if (id >= n) throw ScenarioError(path, "node " + std::to_string(id) + " does not exist");
    return NodeId{static_cast<std::uint32_t>(id)};
}

NodeId node_field(Reader& r, std::string_view key, std::size_t n) { return node_id(r.raw(key), r.at(key), n); }

TopologySpec parse_topology(const json& node, const std::string& path) {
    Reader r(node, path);
    const auto mode = r.string("mode", "", true);
    TopologySpec spec;
    if (mode == "explicit") {
        const auto count = r.integer<std::uint32_t>("nodes", 0, true, 1, 1u << 20);
        std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
        if (r.has("edges")) {
            const auto& arr = r.array("edges");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const auto at = r.at("edges") + "." + std::to_string(i);
                const auto& e = arr[i];
                if (!e.is_array() || e.size() != 2) throw ScenarioError(at, "expected a pair of node ids");
                const auto a = node_id(e[0], at + ".0", count);
                const auto b = node_id(e[1], at + ".1", count);
                edges.emplace_back(a.value, b.value);
            }
        }
        spec = TopologySpec::explicit_edges(count, std::move(edges));
    } else if (mode == "unit_disk") {
        std::vector<Position> positions;
        const auto& arr = r.array("positions");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto at = r.at("positions") + "." + std::to_string(i);
            const auto& p = arr[i];
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                throw ScenarioError(at, "expected [x, y]");
            }
            positions.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        if (positions.empty()) throw ScenarioError(r.at("positions"), "needs at least one node");
        const double range = r.number("range", 0.0, 0.0, 1e12);
        if (range <= 0.0) throw ScenarioError(r.at("range"), "must be positive");
        spec = TopologySpec::unit_disk(std::move(positions), range);
    } else {
        throw ScenarioError(r.at("mode"), "expected \"explicit\" or \"unit_disk\"");
    }
    r.finish();
    try {
        (void)build_topology(spec);
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(path, e.what());
    }
    return spec;
}

std::size_t node_count(const TopologySpec& spec) {
    return spec.mode == TopologyMode::UnitDisk ? spec.positions.size() : spec.node_ids.size();
}

adversary::AdversaryProfile parse_adversary(const json& node, const std::string& path, std::size_t n) {
    Reader r(node, path);
    adversary::AdversaryProfile p;
    if (!r.has("node")) throw ScenarioError(r.at("node"), "required field is missing");
    p.node = node_field(r, "node", n);
    const auto kind = r.string("kind", "", true);
    const auto parsed = adversary::parse_kind(kind);
    if (!parsed) throw ScenarioError(r.at("kind"), "unknown adversary kind \"" + kind + "\"");
    p.kind = *parsed;
    p.drop_p = r.number("drop_p", 1.0, 0.0, 1.0);
    if (r.has("partner")) p.partner = node_field(r, "partner", n);
    p.advertised_hops = r.integer<std::uint32_t>("advertised_hops", 1, false, 0, 1u << 20);
    p.range_multiplier = r.number("range_multiplier", 3.0, 1.0, 1e6);
    p.active_from = r.integer<Tick>("active_from", 0);
    if (r.has("victims")) {
        const auto& arr = r.array("victims");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            p.victims.push_back(node_id(arr[i], r.at("victims") + "." + std::to_string(i), n));
        }
    }
    if (r.has("misaddress_to")) p.misaddress_to = node_field(r, "misaddress_to", n);
    p.tamper = r.boolean("tamper", false);
    r.finish();
    try {
        p.validate(n);
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(path, e.what());
    }
    return p;
}

TrafficFlow parse_flow(const json& node, const std::string& path, std::size_t n) {
    Reader r(node, path);
    TrafficFlow f;
    if (!r.has("source")) throw ScenarioError(r.at("source"), "required field is missing");
    f.source = node_field(r, "source", n);
    if (r.has("destination")) f.destination = node_field(r, "destination", n);
    f.start = r.integer<Tick>("start", 0);
    f.period = r.integer<Tick>("period", 10, false, 1);
    f.count = r.integer<std::uint32_t>("count", 1, false, 0, 1'000'000);
    f.payload_bytes = r.integer<std::uint32_t>("payload_bytes", 32, false, 1, 65535);
    f.jitter = r.integer<Tick>("jitter", 0);
    r.finish();
    return f;
}

Constants parse_constants(const json& node, const std::string& path) {
    Reader r(node, path);
    Constants c;
    c.link_drop_q = r.number("link_drop_q", c.link_drop_q, 0.0, 1.0);
    c.hop_delay = r.integer<Tick>("hop_delay", c.hop_delay, false, 1);
    c.header_bits = r.integer<std::uint64_t>("header_bits", c.header_bits);
    c.costs.tx_per_bit = r.integer<std::uint64_t>("tx_per_bit", c.costs.tx_per_bit);
    c.costs.rx_per_bit = r.integer<std::uint64_t>("rx_per_bit", c.costs.rx_per_bit);
    c.costs.per_instruction = r.integer<std::uint64_t>("per_instruction", c.costs.per_instruction);
    c.crypto_instructions = r.integer<std::uint64_t>("crypto_instructions", c.crypto_instructions);
    c.snep_window = r.integer<std::uint32_t>("snep_window", c.snep_window, false, 0, 1u << 16);

    auto& a = c.aodv;
    a.route_ttl = r.integer<Tick>("route_ttl", a.route_ttl, false, 1);
    a.discovery_timeout = r.integer<Tick>("discovery_timeout", a.discovery_timeout, false, 1);
    a.local_timeout = r.integer<Tick>("local_timeout", a.local_timeout, false, 1);
    a.discovery_retries = r.integer<std::uint32_t>("discovery_retries", a.discovery_retries, false, 0, 100);
    a.frp_timeout = r.integer<Tick>("frp_timeout", a.frp_timeout, false, 1);
    a.data_ttl = r.integer<std::uint32_t>("data_ttl", a.data_ttl, false, 1, 1u << 16);
    a.frq_attempts = r.integer<std::uint32_t>("frq_attempts", a.frq_attempts, false, 1, 100);

    auto& d = c.dri;
    d.threshold_interval = r.integer<Tick>("threshold_interval", d.threshold_interval, false, 1);
    d.probe_slack = r.integer<Tick>("probe_slack", d.probe_slack);
    d.probe_spacing = r.integer<Tick>("probe_spacing", d.probe_spacing, false, 1);
    d.further_probes = r.integer<std::uint32_t>("further_probes", d.further_probes, false, 1, 255);
    d.query_timeout = r.integer<Tick>("query_timeout", d.query_timeout, false, 1);
    d.round_timeout = r.integer<Tick>("round_timeout", d.round_timeout, false, 1);
    d.blacklist_on_flag = r.boolean("blacklist_on_flag", d.blacklist_on_flag);

    auto& m = c.nms;
    m.monitor_timeout = r.integer<Tick>("monitor_timeout", m.monitor_timeout, false, 1);
    m.primary_grace = r.integer<Tick>("primary_grace", m.primary_grace);
    m.claim_settle = r.integer<Tick>("claim_settle", m.claim_settle, false, 1);
    m.strike_limit = r.integer<std::uint32_t>("strike_limit", m.strike_limit, false, 1, 1u << 16);
    m.monitoring = r.boolean("monitoring", m.monitoring);
    r.finish();
    return c;
}

MuteslaSettings parse_mutesla(const json& node, const std::string& path) {
    Reader r(node, path);
    MuteslaSettings m;
    m.interval_len = r.integer<Tick>("interval_len", m.interval_len, false, 1);
    m.disclosure_lag = r.integer<std::uint32_t>("disclosure_lag", m.disclosure_lag, false, 1, 1u << 16);
    m.chain_length = r.integer<std::uint32_t>("chain_length", m.chain_length, false, 1, 1u << 20);
    if (r.has("drop_disclosures")) {
        const auto& arr = r.array("drop_disclosures");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto& v = arr[i];
            if (!v.is_number_unsigned()) {
                throw ScenarioError(r.at("drop_disclosures") + "." + std::to_string(i), "expected an interval index");
            }
            m.drop_disclosures.push_back(v.get<std::uint32_t>());
        }
    }
    r.finish();
    return m;
}

}  // namespace

Scenario parse_scenario(const json& doc) {
    Reader r(doc, "");
    Scenario s;
    s.name = r.string("name", "scenario");
    s.seed = r.unsigned64("seed", true);
    s.duration = r.integer<Tick>("duration", 0, true, 1);
    s.epsilon = r.integer<Tick>("epsilon", 0);

    if (!r.has("topology")) throw ScenarioError("topology", "required field is missing");
    s.topology = parse_topology(r.raw("topology"), "topology");
    const std::size_t n = node_count(s.topology);

    if (!r.has("base_station")) throw ScenarioError("base_station", "required field is missing");
    s.base_station = node_field(r, "base_station", n);

    const auto proto = r.string("protocol", "undefended");
    const auto parsed = parse_protocol(proto);
    if (!parsed) throw ScenarioError("protocol", "unknown protocol \"" + proto + "\"");
    s.protocol = *parsed;

    if (r.has("auth")) {
        Reader a(r.raw("auth"), "auth");
        s.auth.mutesla = a.boolean("mutesla", false);
        s.auth.snep = a.boolean("snep", false);
        s.auth.merkle = a.boolean("merkle", false);
        a.finish();
    }

    if (r.has("adversaries")) {
        const auto& arr = r.array("adversaries");
        std::set<NodeId> seen;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto path = "adversaries." + std::to_string(i);
            auto p = parse_adversary(arr[i], path, n);
            if (p.node == s.base_station) throw ScenarioError(path + ".node", "the base station cannot be compromised");
            if (!seen.insert(p.node).second) throw ScenarioError(path + ".node", "node already has a profile");
            s.adversaries.push_back(std::move(p));
        }
        try {
            adversary::validate_profiles(s.adversaries, n);
        } catch (const std::invalid_argument& e) {
            throw ScenarioError("adversaries", e.what());
        }
    }

    if (r.has("traffic")) {
        const auto& arr = r.array("traffic");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto path = "traffic." + std::to_string(i);
            auto f = parse_flow(arr[i], path, n);
            const bool base_bound = s.protocol == ProtocolKind::Nms || s.protocol == ProtocolKind::Multipath2;
            if (base_bound && f.destination && *f.destination != s.base_station) {
                throw ScenarioError(path + ".destination", "gradient protocols only route to the base station");
            }
            s.traffic.push_back(f);
        }
    }

    if (r.has("constants")) s.constants = parse_constants(r.raw("constants"), "constants");
    s.constants.nms.base_station = s.base_station;
    s.constants.nms.crypto_instructions = s.constants.crypto_instructions;

    if (r.has("keys")) {
        Reader k(r.raw("keys"), "keys");
        const auto hex = k.string("master", "", true);
        try {
            s.master = crypto::fixed_from_hex<crypto::Key>(hex);
        } catch (const std::invalid_argument&) {
            throw ScenarioError("keys.master", "expected " + std::to_string(crypto::Key::size * 2) + " hex digits");
        }
        k.finish();
    } else {
        s.master = crypto::truncate_key(crypto::hash("wsnsec-master:" + std::to_string(s.seed)));
    }

    if (r.has("mutesla")) s.mutesla = parse_mutesla(r.raw("mutesla"), "mutesla");
    r.finish();
    return s;
}

json read_scenario_json(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ScenarioError("", "cannot open scenario file " + file.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ScenarioError("", std::string("invalid JSON: ") + e.what());
    }
}

Scenario load_scenario(const std::filesystem::path& file) { return parse_scenario(read_scenario_json(file)); }

void set_dotted(json& doc, std::string_view path, json value) {
    if (path.empty()) throw ScenarioError("", "empty axis path");
    json* cur = &doc;
    std::string walked;
    while (true) {
        const auto dot = path.find('.');
        const std::string seg(path.substr(0, dot));
        const bool last = dot == std::string_view::npos;
        walked = join(walked, seg);
        if (cur->is_array()) {
            std::size_t idx = 0;
            const auto [ptr, ec] = std::from_chars(seg.data(), seg.data() + seg.size(), idx);
            if (ec != std::errc{} || ptr != seg.data() + seg.size() || idx >= cur->size()) {
                throw ScenarioError(walked, "no such array element");
            }
            cur = &(*cur)[idx];
        } else if (cur->is_object()) {
            if (!last && !cur->contains(seg)) throw ScenarioError(walked, "no such field");
            cur = &(*cur)[seg];
        } else {
            throw ScenarioError(walked, "cannot descend into a scalar");
        }
        if (last) break;
        path.remove_prefix(dot + 1);
    }
    *cur = std::move(value);
}

}  // namespace wsnsec::harness
