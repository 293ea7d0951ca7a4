#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace txanomaly {

using TxId = std::uint64_t;
using AddrId = std::uint64_t;
using UserId = std::uint64_t;
using Satoshi = std::uint64_t;

enum class FlowSide { input, output };

/// One (transaction, address, amount) edge on the input or output side of a transaction.
struct FlowRecord {
    TxId tx_id = 0;
    AddrId addr_id = 0;
    Satoshi value = 0;

    friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

/// Single-pass reader over `tx_id<TAB>addr_id<TAB>value` rows. Memory use does not depend on
/// file size. Malformed or blank lines raise ParseError carrying the line number.
class FlowReader {
public:
    FlowReader(const std::string& path, FlowSide side);
    FlowReader(std::istream& in, FlowSide side, std::string source = "<stream>");
    ~FlowReader();
    FlowReader(FlowReader&&) noexcept;
    FlowReader& operator=(FlowReader&&) noexcept;

    std::optional<FlowRecord> next();

    std::size_t rows_read() const noexcept { return rows_; }
    FlowSide side() const noexcept { return side_; }
    const std::string& source() const noexcept { return source_; }

private:
    std::unique_ptr<std::istream> owned_;
    std::istream* in_ = nullptr;
    FlowSide side_;
    std::string source_;
    std::string line_;
    std::size_t line_no_ = 0;
    std::size_t rows_ = 0;
};

template <typename Fn>
std::size_t for_each_flow(const std::string& path, FlowSide side, Fn&& fn) {
    FlowReader reader(path, side);
    while (auto rec = reader.next()) fn(*rec);
    return reader.rows_read();
}

std::vector<FlowRecord> read_flow_records(const std::string& path, FlowSide side);
void write_flow_records(std::ostream& out, std::span<const FlowRecord> records);
void write_flow_records(const std::string& path, std::span<const FlowRecord> records);

/// Sorted, deduplicated address universe from `addr_id` lines.
std::vector<AddrId> load_address_universe(const std::string& path);

struct TheftCaseEntry {
    std::uint64_t case_id = 0;
    std::string case_name;
    AddrId addr_id = 0;

    friend bool operator==(const TheftCaseEntry&, const TheftCaseEntry&) = default;
};

/// Known theft/hack/fraud cases keyed by the addresses implicated in them.
class TheftCatalog {
public:
    TheftCatalog() = default;
    /// Rejects duplicate (case_id, addr_id) pairs and cases with conflicting names.
    explicit TheftCatalog(std::vector<TheftCaseEntry> entries);

    const std::vector<TheftCaseEntry>& entries() const noexcept { return entries_; }
    /// case_id -> indices into entries(), in file order.
    const std::map<std::uint64_t, std::vector<std::size_t>>& cases() const noexcept { return cases_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

private:
    std::vector<TheftCaseEntry> entries_;
    std::map<std::uint64_t, std::vector<std::size_t>> cases_;
};

TheftCatalog load_theft_catalog(const std::string& path);
TheftCatalog parse_theft_catalog(std::istream& in, const std::string& source = "<stream>");

struct DatasetStats {
    std::uint64_t n_input_rows = 0;
    std::uint64_t n_output_rows = 0;
    std::uint64_t n_universe_addresses = 0;  // before wiping
    std::uint64_t n_distinct_addresses = 0;  // after wiping
    std::uint64_t n_distinct_transactions = 0;
    std::uint64_t n_wiped_addresses = 0;

    friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

struct WipeResult {
    std::vector<AddrId> retained;  // sorted ascending
    DatasetStats stats;
};

/// Drops universe addresses that never occur in any input or output row. Without an explicit
/// universe the universe is whatever the streams mention, so nothing is wiped. Stream addresses
/// outside an explicit universe are a ValidationError.
WipeResult wipe_addresses(const std::optional<std::vector<AddrId>>& universe, FlowReader& inputs,
                          FlowReader& outputs);
WipeResult wipe_addresses(const std::optional<std::vector<AddrId>>& universe,
                          const std::string& txin_path, const std::string& txout_path);

}  // namespace txanomaly
