#include "txanomaly/contraction.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "txanomaly/errors.hpp"
#include "txanomaly/text.hpp"

namespace txanomaly {

DisjointSet::DisjointSet(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t DisjointSet::find(std::size_t x) {
    std::size_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
        const std::size_t next = parent_[x];
        parent_[x] = root;
        x = next;
    }
    return root;
}

bool DisjointSet::unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
}

AddressUserMap AddressUserMap::from_pairs(std::vector<std::pair<AddrId, UserId>> pairs) {
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    AddressUserMap map;
    map.addrs_.reserve(pairs.size());
    map.users_.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i > 0 && pairs[i].first == pairs[i - 1].first)
            throw ValidationError("address " + std::to_string(pairs[i].first) +
                                  " maps to both user " + std::to_string(pairs[i - 1].second) +
                                  " and user " + std::to_string(pairs[i].second));
        map.addrs_.push_back(pairs[i].first);
        map.users_.push_back(pairs[i].second);
    }
    std::vector<UserId> distinct = map.users_;
    std::sort(distinct.begin(), distinct.end());
    map.n_users_ = static_cast<std::size_t>(
        std::unique(distinct.begin(), distinct.end()) - distinct.begin());
    return map;
}

UserId AddressUserMap::resolve(AddrId addr) const {
    const auto it = std::lower_bound(addrs_.begin(), addrs_.end(), addr);
    if (it == addrs_.end() || *it != addr) return addr;
    return users_[static_cast<std::size_t>(it - addrs_.begin())];
}

std::vector<std::pair<AddrId, UserId>> AddressUserMap::entries() const {
    std::vector<std::pair<AddrId, UserId>> out;
    out.reserve(addrs_.size());
    for (std::size_t i = 0; i < addrs_.size(); ++i) out.emplace_back(addrs_[i], users_[i]);
    return out;
}

AddressUserMap AddressUserMap::restricted_to(std::span<const AddrId> universe) const {
    std::vector<std::pair<AddrId, UserId>> pairs;
    pairs.reserve(universe.size());
    for (AddrId a : universe) pairs.emplace_back(a, resolve(a));
    return from_pairs(std::move(pairs));
}

AddressUserMap build_contraction(FlowReader& inputs, std::span<const AddrId> universe) {
    std::vector<std::pair<TxId, AddrId>> rows;
    while (auto rec = inputs.next()) rows.emplace_back(rec->tx_id, rec->addr_id);

    std::vector<AddrId> addrs(universe.begin(), universe.end());
    addrs.reserve(addrs.size() + rows.size());
    for (const auto& r : rows) addrs.push_back(r.second);
    std::sort(addrs.begin(), addrs.end());
    addrs.erase(std::unique(addrs.begin(), addrs.end()), addrs.end());

    const auto index_of = [&](AddrId a) {
        return static_cast<std::size_t>(std::lower_bound(addrs.begin(), addrs.end(), a) -
                                        addrs.begin());
    };

    DisjointSet sets(addrs.size());
    std::unordered_map<TxId, std::size_t> first_input;
    first_input.reserve(rows.size());
    for (const auto& [tx, addr] : rows) {
        const std::size_t idx = index_of(addr);
        auto [it, inserted] = first_input.emplace(tx, idx);
        if (!inserted) sets.unite(it->second, idx);
    }

    // Indices follow address order, so the first member seen per root is the class minimum.
    constexpr std::size_t unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> canonical(addrs.size(), unset);
    std::vector<std::pair<AddrId, UserId>> pairs;
    pairs.reserve(addrs.size());
    for (std::size_t i = 0; i < addrs.size(); ++i) {
        const std::size_t root = sets.find(i);
        if (canonical[root] == unset) canonical[root] = i;
        pairs.emplace_back(addrs[i], addrs[canonical[root]]);
    }
    return AddressUserMap::from_pairs(std::move(pairs));
}

AddressUserMap build_contraction(const std::string& txin_path, std::span<const AddrId> universe) {
    FlowReader reader(txin_path, FlowSide::input);
    return build_contraction(reader, universe);
}

AddressUserMap parse_contraction(std::istream& in, const std::string& source) {
    std::vector<std::pair<AddrId, UserId>> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) throw ParseError(source, line_no, "blank line");
        const auto fields = split(line, '\t');
        if (fields.size() != 2)
            throw ParseError(source, line_no, "expected addr_id<TAB>user_id");
        const auto addr = parse_unsigned(fields[0]);
        const auto user = parse_unsigned(fields[1]);
        if (!addr || !user) throw ParseError(source, line_no, "non-integer id");
        pairs.emplace_back(*addr, *user);
    }
    return AddressUserMap::from_pairs(std::move(pairs));
}

AddressUserMap load_contraction(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return parse_contraction(in, path);
}

void write_contraction(std::ostream& out, const AddressUserMap& map) {
    for (const auto& [addr, user] : map.entries()) out << addr << '\t' << user << '\n';
}

void write_contraction(const std::string& path, const AddressUserMap& map) {
    std::ostringstream ss;
    write_contraction(ss, map);
    write_file(path, ss.str());
}

}  // namespace txanomaly
