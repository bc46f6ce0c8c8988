#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "wsnsec/core/clock.hpp"
#include "wsnsec/core/energy.hpp"
#include "wsnsec/core/event_queue.hpp"
#include "wsnsec/core/packet.hpp"
#include "wsnsec/core/rng.hpp"
#include "wsnsec/core/topology.hpp"
#include "wsnsec/core/trace.hpp"

namespace wsnsec {

struct RadioConfig {
    std::uint64_t header_bits = 128;
    /// Independent per-link, per-transmission loss probability.
    double link_drop_q = 0.0;
    Tick hop_delay = 1;
    Tick epsilon = 0;
    EnergyCosts costs{};
    bool trace = false;
};

/// Why a data packet (by uid) failed to reach its destination.
enum class LossCause : std::uint8_t { AdversaryDrop, ChannelDrop, TtlExpired, NoRoute };

std::string_view to_string(LossCause cause) noexcept;

/// Ground-truth fate of every generated data packet.
class DataLedger {
public:
    struct Entry {
        NodeId source;
        Tick generated_at = 0;
        std::optional<Tick> delivered_at;
        std::optional<LossCause> last_loss;
        std::uint32_t copies_delivered = 0;
    };

    void generated(std::uint64_t uid, NodeId source, Tick tick);
    /// Returns true the first time a uid is delivered.
    bool delivered(std::uint64_t uid, Tick tick);
    void lost(std::uint64_t uid, LossCause cause);

    bool knows(std::uint64_t uid) const { return entries_.contains(uid); }
    const Entry& at(std::uint64_t uid) const { return entries_.at(uid); }
    const std::map<std::uint64_t, Entry>& entries() const noexcept { return entries_; }

private:
    std::map<std::uint64_t, Entry> entries_;
};

class Simulator;

/// Per-node protocol handler. A node may host several; every reception is
/// offered to each in attachment order.
class Protocol {
public:
    virtual ~Protocol() = default;
    virtual void start() {}
    virtual void on_receive(const Delivery& delivery) = 0;
};

/// Single-threaded, seeded discrete-event loop over a broadcast radio
/// medium. Every transmission reaches all radio neighbors of the sender one
/// hop_delay later; `next_hop` only marks the addressed receiver.
class Simulator {
public:
    using TransmitObserver = std::function<void(const Packet&, NodeId transmitter, Tick)>;
    using DeliveryObserver = std::function<void(const Delivery&, Tick)>;

    Simulator(Topology topology, RadioConfig config, std::uint64_t seed);

    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    Tick now() const noexcept { return queue_.now(); }
    const Topology& topology() const noexcept { return topology_; }
    const RadioConfig& config() const noexcept { return config_; }
    std::uint64_t seed() const noexcept { return seed_; }

    EnergyMeter& energy() noexcept { return energy_; }
    const EnergyMeter& energy() const noexcept { return energy_; }
    const LooseClock& clock() const noexcept { return clock_; }
    Tick local_time(NodeId node) const { return clock_.local_time(node, now()); }
    Trace& trace() noexcept { return trace_; }
    DataLedger& data_ledger() noexcept { return ledger_; }
    const DataLedger& data_ledger() const noexcept { return ledger_; }

    std::uint64_t next_uid() noexcept { return ++uid_counter_; }

    template <typename P, typename... Args>
    P& attach(NodeId node, Args&&... args) {
        auto owned = std::make_unique<P>(std::forward<Args>(args)...);
        P& ref = *owned;
        protocols_.at(node.value).push_back(std::move(owned));
        return ref;
    }

    /// Transmissions reach `range_multiplier` times the normal radio range
    /// when `long_reach` is set on transmit().
    void set_long_reach(NodeId node, double range_multiplier);

    /// Sends `packet` over the air from `transmitter`. Charges transmit
    /// energy once and receive energy at each receiver.
    void transmit(NodeId transmitter, Packet packet, bool long_reach = false);

    std::uint64_t schedule_timer(NodeId node, Tick delay, std::function<void()> callback);
    void cancel_timer(std::uint64_t token);

    void charge_compute(NodeId node, std::uint64_t instructions) { energy_.charge(node, Compute{instructions}); }

    void on_transmit(TransmitObserver observer) { transmit_observers_.push_back(std::move(observer)); }
    void on_delivery(DeliveryObserver observer) { delivery_observers_.push_back(std::move(observer)); }

    /// Calls start() on every protocol (once), then processes events whose
    /// fire time is <= `end`.
    void run_until(Tick end);
    /// Processes one event; returns false once the queue is empty.
    bool step();

    std::uint64_t transmissions() const noexcept { return transmissions_; }
    std::uint64_t transmissions_of(PacketKind kind) const;

private:
    void dispatch(SimEvent& event);
    void start_protocols();

    Topology topology_;
    RadioConfig config_;
    std::uint64_t seed_;
    EventQueue queue_;
    Rng channel_rng_;
    LooseClock clock_;
    EnergyMeter energy_;
    Trace trace_;
    DataLedger ledger_;
    std::vector<std::vector<std::unique_ptr<Protocol>>> protocols_;
    std::unordered_map<std::uint64_t, std::function<void()>> timers_;
    std::unordered_map<std::uint32_t, std::vector<NodeId>> long_reach_;
    std::vector<TransmitObserver> transmit_observers_;
    std::vector<DeliveryObserver> delivery_observers_;
    std::uint64_t uid_counter_ = 0;
    std::uint64_t timer_counter_ = 0;
    std::uint64_t transmissions_ = 0;
    std::map<PacketKind, std::uint64_t> per_kind_;
    bool started_ = false;
};

}  // namespace wsnsec
