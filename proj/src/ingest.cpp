#include "txanomaly/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "txanomaly/errors.hpp"
#include "txanomaly/text.hpp"

namespace txanomaly {

namespace {

std::unique_ptr<std::istream> open_input(const std::string& path) {
    auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*in) throw IoError("cannot open " + path);
    return in;
}

std::uint64_t field_or_throw(std::string_view field, const std::string& source, std::size_t line,
                             const char* name) {
    if (auto v = parse_unsigned(field)) return *v;
    if (!field.empty() && field.front() == '-' && parse_unsigned(field.substr(1)))
        throw ParseError(source, line, std::string("negative ") + name);
    throw ParseError(source, line, std::string("invalid ") + name + " '" + std::string(field) + "'");
}

}  // namespace

FlowReader::FlowReader(const std::string& path, FlowSide side)
    : owned_(open_input(path)), in_(owned_.get()), side_(side), source_(path) {}

FlowReader::FlowReader(std::istream& in, FlowSide side, std::string source)
    : in_(&in), side_(side), source_(std::move(source)) {}

FlowReader::~FlowReader() = default;
FlowReader::FlowReader(FlowReader&&) noexcept = default;
FlowReader& FlowReader::operator=(FlowReader&&) noexcept = default;

std::optional<FlowRecord> FlowReader::next() {
    if (!std::getline(*in_, line_)) return std::nullopt;
    ++line_no_;
    if (line_.empty()) throw ParseError(source_, line_no_, "blank line");
    const auto fields = split(line_, '\t');
    if (fields.size() != 3)
        throw ParseError(source_, line_no_,
                         "expected 3 tab-separated columns, got " + std::to_string(fields.size()));
    FlowRecord rec;
    rec.tx_id = field_or_throw(fields[0], source_, line_no_, "tx_id");
    rec.addr_id = field_or_throw(fields[1], source_, line_no_, "addr_id");
    rec.value = field_or_throw(fields[2], source_, line_no_, "value");
    ++rows_;
    return rec;
}

std::vector<FlowRecord> read_flow_records(const std::string& path, FlowSide side) {
    std::vector<FlowRecord> out;
    for_each_flow(path, side, [&](const FlowRecord& r) { out.push_back(r); });
    return out;
}

void write_flow_records(std::ostream& out, std::span<const FlowRecord> records) {
    for (const auto& r : records) out << r.tx_id << '\t' << r.addr_id << '\t' << r.value << '\n';
}

void write_flow_records(const std::string& path, std::span<const FlowRecord> records) {
    std::ostringstream ss;
    write_flow_records(ss, records);
    write_file(path, ss.str());
}

std::vector<AddrId> load_address_universe(const std::string& path) {
    auto in = open_input(path);
    std::vector<AddrId> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(*in, line)) {
        ++line_no;
        if (line.empty()) throw ParseError(path, line_no, "blank line");
        out.push_back(field_or_throw(line, path, line_no, "addr_id"));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

TheftCatalog::TheftCatalog(std::vector<TheftCaseEntry> entries) : entries_(std::move(entries)) {
    std::set<std::pair<std::uint64_t, AddrId>> seen;
    std::map<std::uint64_t, std::string> names;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (!seen.emplace(e.case_id, e.addr_id).second)
            throw ValidationError("duplicate theft entry (case " + std::to_string(e.case_id) +
                                  ", address " + std::to_string(e.addr_id) + ")");
        auto [it, inserted] = names.emplace(e.case_id, e.case_name);
        if (!inserted && it->second != e.case_name)
            throw ValidationError("theft case " + std::to_string(e.case_id) +
                                  " has conflicting names '" + it->second + "' and '" +
                                  e.case_name + "'");
        cases_[e.case_id].push_back(i);
    }
}

TheftCatalog parse_theft_catalog(std::istream& in, const std::string& source) {
    std::vector<TheftCaseEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) throw ParseError(source, line_no, "blank line");
        const auto fields = split(line, '\t');
        if (fields.size() != 3)
            throw ParseError(source, line_no,
                             "expected case_id<TAB>case_name<TAB>addr_id (case names may not "
                             "contain tabs), got " +
                                 std::to_string(fields.size()) + " columns");
        TheftCaseEntry e;
        e.case_id = field_or_throw(fields[0], source, line_no, "case_id");
        if (e.case_id == 0) throw ParseError(source, line_no, "case_id must be positive");
        e.case_name = std::string(fields[1]);
        e.addr_id = field_or_throw(fields[2], source, line_no, "addr_id");
        entries.push_back(std::move(e));
    }
    return TheftCatalog(std::move(entries));
}

TheftCatalog load_theft_catalog(const std::string& path) {
    auto in = open_input(path);
    return parse_theft_catalog(*in, path);
}

WipeResult wipe_addresses(const std::optional<std::vector<AddrId>>& universe, FlowReader& inputs,
                          FlowReader& outputs) {
    std::vector<AddrId> seen;
    std::vector<TxId> txs;
    for (FlowReader* reader : {&inputs, &outputs}) {
        while (auto rec = reader->next()) {
            seen.push_back(rec->addr_id);
            txs.push_back(rec->tx_id);
        }
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    std::sort(txs.begin(), txs.end());
    txs.erase(std::unique(txs.begin(), txs.end()), txs.end());

    WipeResult result;
    result.stats.n_input_rows = inputs.rows_read();
    result.stats.n_output_rows = outputs.rows_read();
    result.stats.n_distinct_transactions = txs.size();

    if (universe) {
        const auto& all = *universe;
        if (!std::is_sorted(all.begin(), all.end()))
            throw std::invalid_argument("wipe_addresses: universe must be sorted");
        std::vector<AddrId> outside;
        std::set_difference(seen.begin(), seen.end(), all.begin(), all.end(),
                            std::back_inserter(outside));
        if (!outside.empty())
            throw ValidationError("address " + std::to_string(outside.front()) +
                                  " occurs in the flows but not in the address universe (" +
                                  std::to_string(outside.size()) + " such addresses)");
        result.stats.n_universe_addresses = all.size();
    } else {
        result.stats.n_universe_addresses = seen.size();
    }
    result.retained = std::move(seen);
    result.stats.n_distinct_addresses = result.retained.size();
    result.stats.n_wiped_addresses =
        result.stats.n_universe_addresses - result.stats.n_distinct_addresses;
    return result;
}

WipeResult wipe_addresses(const std::optional<std::vector<AddrId>>& universe,
                          const std::string& txin_path, const std::string& txout_path) {
    FlowReader inputs(txin_path, FlowSide::input);
    FlowReader outputs(txout_path, FlowSide::output);
    return wipe_addresses(universe, inputs, outputs);
}

}  // namespace txanomaly
