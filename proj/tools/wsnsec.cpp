#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "wsnsec/auth/merkle.hpp"
#include "wsnsec/auth/mutesla.hpp"
#include "wsnsec/harness/run.hpp"

namespace {

using namespace wsnsec;

constexpr int kConfigError = 2;

/// Bad input that should map to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

template <typename Fixed>
Fixed hex_arg(const std::string& name, const std::string& text) {
    try {
        return crypto::fixed_from_hex<Fixed>(text);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(name + ": " + e.what());
    }
}

struct SimRun {
    std::string scenario, trace, out, detections, nodes;
    std::optional<std::uint64_t> seed;
};

void sim_run(const SimRun& a) {
    auto doc = harness::read_scenario_json(a.scenario);
    if (a.seed) doc["seed"] = *a.seed;
    const auto scenario = harness::parse_scenario(doc);
    harness::RunOptions opts;
    opts.trace = !a.trace.empty();
    const auto result = harness::run(scenario, opts);
    write_file(a.out, harness::to_csv({result.metrics}));
    if (!a.trace.empty()) write_file(a.trace, result.trace);
    if (!a.detections.empty()) write_file(a.detections, harness::detections_csv(result));
    if (!a.nodes.empty()) write_file(a.nodes, harness::nodes_csv(result));
}

struct SimSweep {
    std::string scenario, axis, values, out;
    unsigned jobs = 1;
};

void sim_sweep(const SimSweep& a) {
    const auto doc = harness::read_scenario_json(a.scenario);
    harness::SweepSpec spec;
    spec.axis = a.axis;
    spec.values = harness::parse_values(a.values);
    spec.jobs = a.jobs;
    std::vector<harness::MetricsReport> rows;
    for (auto& r : harness::sweep(doc, spec)) rows.push_back(std::move(r.metrics));
    write_file(a.out, harness::to_csv(rows));
}

void keychain_gen(const std::string& seed_hex, std::uint32_t n) {
    if (n == 0) throw ConfigError("--n must be at least 1");
    const auto chain = auth::generate_chain(hex_arg<crypto::Key>("--seed", seed_hex), n);
    for (std::uint32_t i = 0; i <= n; ++i) std::cout << i << " " << crypto::to_hex(chain.key(i)) << "\n";
}

int keychain_verify(const std::string& k0, const std::string& key, std::uint64_t steps) {
    const auto anchor = hex_arg<crypto::Key>("--k0", k0);
    const auto folded = crypto::chain_fold(hex_arg<crypto::Key>("--key", key), steps);
    std::cout << crypto::to_hex(folded) << "\n";
    const bool ok = folded == anchor;
    std::cout << (ok ? "valid" : "invalid") << "\n";
    return ok ? 0 : 1;
}

auth::MerkleTree tree_from(const std::string& dir_file) {
    try {
        return auth::build_tree(auth::parse_directory(read_file(dir_file)));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(dir_file + ": " + e.what());
    }
}

int merkle_verify(const std::string& root, std::uint32_t id, const std::string& pk, const std::string& path_file) {
    auth::AuthPath path;
    try {
        path = auth::parse_path(read_file(path_file));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path_file + ": " + e.what());
    }
    Bytes key;
    try {
        key = crypto::from_hex(pk);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--pk: ") + e.what());
    }
    const bool ok = auth::verify(hex_arg<auth::Digest>("--root", root), NodeId{id}, key, path);
    std::cout << (ok ? "valid" : "invalid") << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wireless sensor network routing-security simulator"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("sim", "Run scenarios");
    sim->require_subcommand(1);
    SimRun run_args;
    auto* run = sim->add_subcommand("run", "Run one scenario and write a CSV row");
    run->add_option("--scenario", run_args.scenario, "Scenario JSON file")->required();
    run->add_option("--seed", run_args.seed, "Override the scenario seed");
    run->add_option("--trace", run_args.trace, "Write the event trace here");
    run->add_option("--out", run_args.out, "Metrics CSV")->required();
    run->add_option("--detections", run_args.detections, "Per-detection CSV");
    run->add_option("--nodes", run_args.nodes, "Per-node energy CSV");

    SimSweep sweep_args;
    auto* sweep = sim->add_subcommand("sweep", "Run one scenario per axis value");
    sweep->add_option("--scenario", sweep_args.scenario, "Scenario JSON file")->required();
    sweep->add_option("--axis", sweep_args.axis, "Dotted field path, or 'protocol'")->required();
    sweep->add_option("--values", sweep_args.values, "Comma-separated values")->required();
    sweep->add_option("--out", sweep_args.out, "Metrics CSV")->required();
    sweep->add_option("--jobs", sweep_args.jobs, "Parallel runs")->check(CLI::PositiveNumber);

    auto* keychain = app.add_subcommand("keychain", "Broadcast-authentication key chains");
    keychain->require_subcommand(1);
    std::string kc_seed;
    std::uint32_t kc_n = 0;
    auto* gen = keychain->add_subcommand("gen", "Print K_0..K_n, one per line");
    gen->add_option("--seed", kc_seed, "K_n as hex")->required();
    gen->add_option("--n", kc_n, "Chain length")->required();
    std::string kv_k0, kv_key;
    std::uint64_t kv_steps = 0;
    auto* kverify = keychain->add_subcommand("verify", "Check that F^steps(key) equals K_0");
    kverify->add_option("--k0", kv_k0, "Commitment as hex")->required();
    kverify->add_option("--key", kv_key, "Disclosed key as hex")->required();
    kverify->add_option("--steps", kv_steps, "Interval index of the key")->required();

    auto* merkle = app.add_subcommand("merkle", "Public-key membership proofs");
    merkle->require_subcommand(1);
    std::string m_dir = "directory.txt";
    auto* build = merkle->add_subcommand("build", "Print the root of a key directory");
    build->add_option("--dir", m_dir, "Directory file: lines of '<id> <pk-hex>'")->required();
    std::uint32_t m_id = 0;
    auto* prove = merkle->add_subcommand("prove", "Print the authentication path of an id");
    prove->add_option("--id", m_id, "Node id")->required();
    prove->add_option("--dir", m_dir, "Directory file")->capture_default_str();
    std::string mv_root, mv_pk, mv_path;
    auto* mverify = merkle->add_subcommand("verify", "Check a key against a root");
    mverify->add_option("--root", mv_root, "Root digest as hex")->required();
    mverify->add_option("--id", m_id, "Node id")->required();
    mverify->add_option("--pk", mv_pk, "Public key as hex")->required();
    mverify->add_option("--path", mv_path, "Path file: lines of '<L|R> <hex>'")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*run) sim_run(run_args);
        if (*sweep) sim_sweep(sweep_args);
        if (*gen) keychain_gen(kc_seed, kc_n);
        if (*kverify) return keychain_verify(kv_k0, kv_key, kv_steps);
        if (*build) std::cout << crypto::to_hex(tree_from(m_dir).root()) << "\n";
        if (*prove) {
            const auto tree = tree_from(m_dir);
            if (!tree.directory().index_of(NodeId{m_id})) throw ConfigError("id " + std::to_string(m_id) + " is not in " + m_dir);
            std::cout << auth::format_path(auth::prove(tree, NodeId{m_id}));
        }
        if (*mverify) return merkle_verify(mv_root, m_id, mv_pk, mv_path);
    } catch (const harness::ScenarioError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
