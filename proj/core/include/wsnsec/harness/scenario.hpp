#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wsnsec/adversary/adversary.hpp"
#include "wsnsec/core/simulator.hpp"
#include "wsnsec/core/topology.hpp"
#include "wsnsec/crypto/primitives.hpp"
#include "wsnsec/detect/dri.hpp"
#include "wsnsec/nms/nms.hpp"
#include "wsnsec/routing/aodv.hpp"

namespace wsnsec::harness {

enum class ProtocolKind : std::uint8_t { Undefended, FrqFrp, DriGrayhole, Nms, Multipath2 };

std::string_view to_string(ProtocolKind p) noexcept;
std::optional<ProtocolKind> parse_protocol(std::string_view name) noexcept;

struct TrafficFlow {
    NodeId source;
    /// Defaults to the base station.
    std::optional<NodeId> destination;
    Tick start = 0;
    Tick period = 10;
    std::uint32_t count = 1;
    std::uint32_t payload_bytes = 32;
    /// Each send is delayed by a uniform draw in [0, jitter].
    Tick jitter = 0;
};

struct AuthToggles {
    bool mutesla = false;
    bool snep = false;
    bool merkle = false;
};

struct MuteslaSettings {
    Tick interval_len = 10;
    std::uint32_t disclosure_lag = 2;
    std::uint32_t chain_length = 64;
    /// Intervals whose key disclosure the base station skips.
    std::vector<std::uint32_t> drop_disclosures;
};

/// Every tunable the protocols expose, with their defaults.
struct Constants {
    double link_drop_q = 0.0;
    Tick hop_delay = 1;
    std::uint64_t header_bits = 128;
    EnergyCosts costs{};
    std::uint64_t crypto_instructions = 1000;
    std::uint32_t snep_window = 4;
    routing::AodvConfig aodv{};
    detect::DriConfig dri{};
    nms::NmsConfig nms{};
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    Tick duration = 0;
    NodeId base_station{0};
    Tick epsilon = 0;
    TopologySpec topology;
    ProtocolKind protocol = ProtocolKind::Undefended;
    AuthToggles auth;
    std::vector<adversary::AdversaryProfile> adversaries;
    std::vector<TrafficFlow> traffic;
    Constants constants;
    crypto::Key master{};
    MuteslaSettings mutesla;
};

/// Invalid scenario. `path()` is the dotted location of the offending field
/// (e.g. `adversaries.0.drop_p`), empty for document-level problems.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(std::string path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

Scenario parse_scenario(const nlohmann::json& doc);
/// Reads and parses a JSON file. Syntax errors become ScenarioError.
nlohmann::json read_scenario_json(const std::filesystem::path& file);
Scenario load_scenario(const std::filesystem::path& file);

/// Replaces the value at a dotted path (`adversaries.0.drop_p`). Array
/// segments must be in range; object segments must already exist unless
/// they are the last one.
void set_dotted(nlohmann::json& doc, std::string_view path, nlohmann::json value);

}  // namespace wsnsec::harness
