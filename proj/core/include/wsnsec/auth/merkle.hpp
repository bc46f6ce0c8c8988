#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wsnsec/core/types.hpp"
#include "wsnsec/crypto/primitives.hpp"

namespace wsnsec::auth {

using crypto::Digest;

struct DirectoryEntry {
    NodeId id;
    Bytes public_key;
};

/// Canonical (ascending id) list of node public keys.
class KeyDirectory {
public:
    KeyDirectory() = default;
    /// Sorts by id; throws std::invalid_argument on a duplicate id.
    explicit KeyDirectory(std::vector<DirectoryEntry> entries);

    const std::vector<DirectoryEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    std::optional<std::size_t> index_of(NodeId id) const;

private:
    std::vector<DirectoryEntry> entries_;
};

/// Leaf value: hash(be32(id) || pk).
Digest leaf_hash(NodeId id, std::span<const std::uint8_t> public_key);
/// Internal value: hash(left || right).
Digest node_hash(const Digest& left, const Digest& right);
/// Value of the sentinel leaves that pad the tree to a power of two.
Digest padding_leaf();

enum class Side : std::uint8_t { Left, Right };

struct PathStep {
    Digest sibling;
    Side side = Side::Right;  // where the sibling sits relative to the running hash

    bool operator==(const PathStep&) const = default;
};

struct AuthPath {
    std::vector<PathStep> siblings;  // bottom-up

    std::size_t height() const noexcept { return siblings.size(); }
};

class MerkleTree {
public:
    const Digest& root() const noexcept { return levels_.back().front(); }
    std::uint32_t height() const noexcept { return static_cast<std::uint32_t>(levels_.size() - 1); }
    std::size_t real_leaves() const noexcept { return directory_.size(); }
    std::size_t padded_leaves() const noexcept { return levels_.front().size(); }
    const std::vector<std::vector<Digest>>& levels() const noexcept { return levels_; }
    const KeyDirectory& directory() const noexcept { return directory_; }

private:
    friend MerkleTree build_tree(const KeyDirectory& dir);
    KeyDirectory directory_;
    std::vector<std::vector<Digest>> levels_;  // levels_[0] = leaves
};

/// Throws std::invalid_argument for an empty directory.
MerkleTree build_tree(const KeyDirectory& dir);

/// Throws std::out_of_range for an id not in the tree.
AuthPath prove(const MerkleTree& tree, NodeId id);

/// Recomputes the root from (id, pk) and the sibling path. A path whose
/// length differs from `expected_height` (when given) is rejected.
bool verify(const Digest& root, NodeId id, std::span<const std::uint8_t> public_key, const AuthPath& path,
            std::optional<std::uint32_t> expected_height = std::nullopt);

/// What one sensor keeps after pre-distribution: the root plus its own
/// sibling path, i.e. H + 1 digests.
struct VerifierState {
    Digest root;
    AuthPath own_path;

    std::size_t storage_units() const noexcept { return 1 + own_path.height(); }
    std::uint32_t height() const noexcept { return static_cast<std::uint32_t>(own_path.height()); }

    /// Authenticates a peer's (id, pk, path) claim against the stored root.
    bool authenticate(NodeId peer, std::span<const std::uint8_t> public_key, const AuthPath& path) const {
        return verify(root, peer, public_key, path, height());
    }
};

VerifierState make_verifier(const MerkleTree& tree, NodeId id);

/// Directory text: one `<id> <pk-hex>` per line; blank lines and `#`
/// comments skipped. Throws std::invalid_argument naming the bad line.
KeyDirectory parse_directory(std::string_view text);
std::string format_directory(const KeyDirectory& dir);

/// Path text: one `<L|R> <hex-digest>` line per level, bottom-up.
std::string format_path(const AuthPath& path);
AuthPath parse_path(std::string_view text);

/// Hello credential: be32 id || be16 pk length || pk || per level
/// (side byte || digest).
Bytes encode_credential(NodeId id, std::span<const std::uint8_t> public_key, const AuthPath& path);
struct Credential {
    NodeId id;
    Bytes public_key;
    AuthPath path;
};
/// nullopt on any framing error.
std::optional<Credential> decode_credential(std::span<const std::uint8_t> wire);

}  // namespace wsnsec::auth
