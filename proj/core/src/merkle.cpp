#include "wsnsec/auth/merkle.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace wsnsec::auth {

KeyDirectory::KeyDirectory(std::vector<DirectoryEntry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const DirectoryEntry& a, const DirectoryEntry& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (entries_[i].id == entries_[i - 1].id) {
            throw std::invalid_argument("duplicate id " + std::to_string(entries_[i].id.value) + " in key directory");
        }
    }
}

std::optional<std::size_t> KeyDirectory::index_of(NodeId id) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                               [](const DirectoryEntry& e, NodeId v) { return e.id < v; });
    if (it == entries_.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - entries_.begin());
}

Digest leaf_hash(NodeId id, std::span<const std::uint8_t> public_key) {
    Bytes in;
    in.reserve(4 + public_key.size());
    crypto::append_be32(in, id.value);
    in.insert(in.end(), public_key.begin(), public_key.end());
    return crypto::hash(in);
}

Digest node_hash(const Digest& left, const Digest& right) {
    Bytes in(left.bytes.begin(), left.bytes.end());
    in.insert(in.end(), right.bytes.begin(), right.bytes.end());
    return crypto::hash(in);
}

Digest padding_leaf() {
    static const Digest value = [] {
        const Bytes zeros(Digest::size, 0);
        return crypto::hash(zeros);
    }();
    return value;
}

MerkleTree build_tree(const KeyDirectory& dir) {
    if (dir.size() == 0) throw std::invalid_argument("Merkle tree needs at least one directory entry");
    MerkleTree tree;
    tree.directory_ = dir;

    std::size_t width = 1;
    while (width < dir.size()) width *= 2;

    std::vector<Digest> leaves;
    leaves.reserve(width);
    for (const auto& e : dir.entries()) leaves.push_back(leaf_hash(e.id, e.public_key));
    leaves.resize(width, padding_leaf());
    tree.levels_.push_back(std::move(leaves));

    while (tree.levels_.back().size() > 1) {
        const auto& below = tree.levels_.back();
        std::vector<Digest> above;
        above.reserve(below.size() / 2);
        for (std::size_t i = 0; i < below.size(); i += 2) above.push_back(node_hash(below[i], below[i + 1]));
        tree.levels_.push_back(std::move(above));
    }
    return tree;
}

AuthPath prove(const MerkleTree& tree, NodeId id) {
    const auto index = tree.directory().index_of(id);
    if (!index) throw std::out_of_range("id " + std::to_string(id.value) + " is not in the Merkle tree");
    AuthPath path;
    std::size_t pos = *index;
    for (std::size_t level = 0; level + 1 < tree.levels().size(); ++level) {
        const bool is_left = pos % 2 == 0;
        const std::size_t sib = is_left ? pos + 1 : pos - 1;
        path.siblings.push_back(PathStep{tree.levels()[level][sib], is_left ? Side::Right : Side::Left});
        pos /= 2;
    }
    return path;
}

bool verify(const Digest& root, NodeId id, std::span<const std::uint8_t> public_key, const AuthPath& path,
            std::optional<std::uint32_t> expected_height) {
    if (expected_height && path.height() != *expected_height) return false;
    Digest running = leaf_hash(id, public_key);
    for (const auto& step : path.siblings) {
        running = step.side == Side::Right ? node_hash(running, step.sibling) : node_hash(step.sibling, running);
    }
    return crypto::constant_time_equal(running.view(), root.view());
}

VerifierState make_verifier(const MerkleTree& tree, NodeId id) { return VerifierState{tree.root(), prove(tree, id)}; }

namespace {

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        out.push_back(text.substr(0, nl));
        if (nl == std::string_view::npos) break;
        text.remove_prefix(nl + 1);
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::pair<std::string_view, std::string_view> split_pair(std::string_view line, std::size_t number) {
    const auto sp = line.find_first_of(" \t");
    if (sp == std::string_view::npos) {
        throw std::invalid_argument("line " + std::to_string(number) + ": expected two fields");
    }
    return {trim(line.substr(0, sp)), trim(line.substr(sp + 1))};
}

}  // namespace

KeyDirectory parse_directory(std::string_view text) {
    std::vector<DirectoryEntry> entries;
    std::size_t number = 0;
    for (auto raw : lines_of(text)) {
        ++number;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto [id_text, pk_text] = split_pair(line, number);
        std::uint32_t id = 0;
        try {
            std::size_t used = 0;
            const unsigned long v = std::stoul(std::string(id_text), &used);
            if (used != id_text.size() || v > 0xFFFFFFFFul) throw std::invalid_argument("range");
            id = static_cast<std::uint32_t>(v);
        } catch (const std::exception&) {
            throw std::invalid_argument("line " + std::to_string(number) + ": bad node id");
        }
        try {
            entries.push_back({NodeId{id}, crypto::from_hex(pk_text)});
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("line " + std::to_string(number) + ": bad public key hex");
        }
    }
    return KeyDirectory(std::move(entries));
}

std::string format_directory(const KeyDirectory& dir) {
    std::string out;
    for (const auto& e : dir.entries()) out += std::to_string(e.id.value) + " " + crypto::to_hex(e.public_key) + "\n";
    return out;
}

std::string format_path(const AuthPath& path) {
    std::string out;
    for (const auto& step : path.siblings) {
        out += step.side == Side::Left ? "L " : "R ";
        out += crypto::to_hex(step.sibling) + "\n";
    }
    return out;
}

AuthPath parse_path(std::string_view text) {
    AuthPath path;
    std::size_t number = 0;
    for (auto raw : lines_of(text)) {
        ++number;
        const auto line = trim(raw);
        if (line.empty()) continue;
        const auto [side, digest] = split_pair(line, number);
        PathStep step;
        if (side == "L") {
            step.side = Side::Left;
        } else if (side == "R") {
            step.side = Side::Right;
        } else {
            throw std::invalid_argument("line " + std::to_string(number) + ": side must be L or R");
        }
        try {
            step.sibling = crypto::fixed_from_hex<Digest>(digest);
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("line " + std::to_string(number) + ": bad digest hex");
        }
        path.siblings.push_back(step);
    }
    return path;
}

Bytes encode_credential(NodeId id, std::span<const std::uint8_t> public_key, const AuthPath& path) {
    Bytes out;
    crypto::append_be32(out, id.value);
    out.push_back(static_cast<std::uint8_t>(public_key.size() >> 8));
    out.push_back(static_cast<std::uint8_t>(public_key.size() & 0xFF));
    out.insert(out.end(), public_key.begin(), public_key.end());
    for (const auto& step : path.siblings) {
        out.push_back(step.side == Side::Left ? 0 : 1);
        out.insert(out.end(), step.sibling.bytes.begin(), step.sibling.bytes.end());
    }
    return out;
}

std::optional<Credential> decode_credential(std::span<const std::uint8_t> wire) {
    if (wire.size() < 6) return std::nullopt;
    Credential c;
    c.id = NodeId{(std::uint32_t(wire[0]) << 24) | (std::uint32_t(wire[1]) << 16) | (std::uint32_t(wire[2]) << 8) |
                  std::uint32_t(wire[3])};
    const std::size_t pk_len = (std::size_t(wire[4]) << 8) | wire[5];
    if (wire.size() < 6 + pk_len) return std::nullopt;
    c.public_key.assign(wire.begin() + 6, wire.begin() + 6 + static_cast<std::ptrdiff_t>(pk_len));
    auto rest = wire.subspan(6 + pk_len);
    constexpr std::size_t step_len = 1 + Digest::size;
    if (rest.size() % step_len != 0) return std::nullopt;
    for (std::size_t i = 0; i < rest.size(); i += step_len) {
        if (rest[i] > 1) return std::nullopt;
        PathStep step;
        step.side = rest[i] == 0 ? Side::Left : Side::Right;
        std::copy(rest.begin() + static_cast<std::ptrdiff_t>(i + 1),
                  rest.begin() + static_cast<std::ptrdiff_t>(i + step_len), step.sibling.bytes.begin());
        c.path.siblings.push_back(step);
    }
    return c;
}

}  // namespace wsnsec::auth
