#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "txanomaly/ingest.hpp"

namespace txanomaly {

/// Union-find over dense indices with path compression and union by size.
class DisjointSet {
public:
    explicit DisjointSet(std::size_t n);

    std::size_t find(std::size_t x);
    /// Returns false when a and b were already in the same set.
    bool unite(std::size_t a, std::size_t b);
    std::size_t set_size(std::size_t x) { return size_[find(x)]; }
    std::size_t size() const noexcept { return parent_.size(); }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

/// Total mapping from address to user. Addresses without an explicit entry resolve to
/// themselves, so every address has exactly one user.
class AddressUserMap {
public:
    AddressUserMap() = default;

    /// Entries may arrive in any order; identical duplicates collapse, conflicting ones throw
    /// ValidationError.
    static AddressUserMap from_pairs(std::vector<std::pair<AddrId, UserId>> pairs);

    UserId resolve(AddrId addr) const;

    /// Number of distinct user ids over the explicit entries.
    std::size_t n_users() const noexcept { return n_users_; }
    std::size_t size() const noexcept { return addrs_.size(); }
    bool empty() const noexcept { return addrs_.empty(); }

    /// Explicit entries sorted by address.
    std::vector<std::pair<AddrId, UserId>> entries() const;

    /// Explicit entry for every address of `universe` (sorted input not required).
    AddressUserMap restricted_to(std::span<const AddrId> universe) const;

    friend bool operator==(const AddressUserMap&, const AddressUserMap&) = default;

private:
    std::vector<AddrId> addrs_;
    std::vector<UserId> users_;
    std::size_t n_users_ = 0;
};

/// Common-input-ownership: all input addresses of one transaction share a user, closed
/// transitively. The canonical user id is the smallest address in each class. Addresses of
/// `universe` that never appear as inputs become singleton users.
AddressUserMap build_contraction(FlowReader& inputs, std::span<const AddrId> universe = {});
AddressUserMap build_contraction(const std::string& txin_path, std::span<const AddrId> universe = {});

AddressUserMap load_contraction(const std::string& path);
AddressUserMap parse_contraction(std::istream& in, const std::string& source = "<stream>");

/// `addr_id<TAB>user_id` rows sorted by address.
void write_contraction(std::ostream& out, const AddressUserMap& map);
void write_contraction(const std::string& path, const AddressUserMap& map);

}  // namespace txanomaly
