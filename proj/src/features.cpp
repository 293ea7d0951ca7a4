#include "txanomaly/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "txanomaly/errors.hpp"
#include "txanomaly/parallel.hpp"
#include "txanomaly/text.hpp"

namespace txanomaly {

namespace {

struct UserFlow {
    TxId tx;
    UserId user;
    Amount value;
};

// Resolves every row to its user, then merges rows sharing (tx, user). Result is sorted by
// (tx, user), which makes everything downstream independent of input row order.
std::vector<UserFlow> aggregate_side(FlowReader& reader, const AddressUserMap& map) {
    std::vector<UserFlow> rows;
    while (auto rec = reader.next()) rows.push_back({rec->tx_id, map.resolve(rec->addr_id), rec->value});
    std::sort(rows.begin(), rows.end(), [](const UserFlow& a, const UserFlow& b) {
        return std::tie(a.tx, a.user) < std::tie(b.tx, b.user);
    });
    std::vector<UserFlow> merged;
    for (const auto& r : rows) {
        if (!merged.empty() && merged.back().tx == r.tx && merged.back().user == r.user)
            merged.back().value += r.value;
        else
            merged.push_back(r);
    }
    return merged;
}

void fill_csr(const std::vector<UserFlow>& flows, const std::vector<UserId>& users,
              std::vector<std::size_t>& offsets, std::vector<Amount>& values) {
    const auto index_of = [&](UserId u) {
        return static_cast<std::size_t>(std::lower_bound(users.begin(), users.end(), u) - users.begin());
    };
    offsets.assign(users.size() + 1, 0);
    for (const auto& f : flows) ++offsets[index_of(f.user) + 1];
    for (std::size_t i = 0; i < users.size(); ++i) offsets[i + 1] += offsets[i];
    values.assign(flows.size(), 0);
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    // flows are tx-ordered, so each user's slice ends up tx-ordered too
    for (const auto& f : flows) values[cursor[index_of(f.user)]++] = f.value;
}

void fill_adjacency(std::vector<std::pair<std::size_t, std::size_t>> edges, std::size_t n,
                    std::vector<std::size_t>& offsets, std::vector<std::size_t>& neighbors) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    offsets.assign(n + 1, 0);
    for (const auto& e : edges) ++offsets[e.first + 1];
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    neighbors.resize(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) neighbors[i] = edges[i].second;
}

double to_real(Amount a) { return static_cast<double>(a); }

struct SideStats {
    double total = 0;
    double mean = 0;
    double stddev = 0;
};

SideStats side_stats(std::span<const Amount> totals) {
    SideStats s;
    if (totals.empty()) return s;
    Amount sum = 0;
    for (Amount v : totals) sum += v;
    const double n = static_cast<double>(totals.size());
    s.total = to_real(sum);
    s.mean = s.total / n;
    double ss = 0;
    for (Amount v : totals) {
        const double d = to_real(v) - s.mean;
        ss += d * d;
    }
    s.stddev = std::sqrt(ss / n);
    return s;
}

double mean_degree(std::span<const std::size_t> neighbors, const std::vector<std::uint64_t>& degree) {
    if (neighbors.empty()) return 0.0;
    Amount sum = 0;
    for (std::size_t v : neighbors) sum += degree[v];
    return to_real(sum) / static_cast<double>(neighbors.size());
}

}  // namespace

std::size_t UserGraph::index_of(UserId user) const {
    const auto it = std::lower_bound(users.begin(), users.end(), user);
    if (it == users.end() || *it != user)
        throw std::out_of_range("user " + std::to_string(user) + " not in graph");
    return static_cast<std::size_t>(it - users.begin());
}

UserGraph build_user_graph(FlowReader& inputs, FlowReader& outputs, const AddressUserMap& map) {
    const auto ins = aggregate_side(inputs, map);
    const auto outs = aggregate_side(outputs, map);

    UserGraph g;
    g.users.reserve(ins.size() + outs.size());
    for (const auto& f : ins) g.users.push_back(f.user);
    for (const auto& f : outs) g.users.push_back(f.user);
    std::sort(g.users.begin(), g.users.end());
    g.users.erase(std::unique(g.users.begin(), g.users.end()), g.users.end());
    const std::size_t n = g.users.size();

    fill_csr(outs, g.users, g.received_offsets, g.received);
    fill_csr(ins, g.users, g.sent_offsets, g.sent);

    g.in_degree.assign(n, 0);
    g.out_degree.assign(n, 0);
    std::vector<std::pair<std::size_t, std::size_t>> forward;
    std::vector<std::pair<std::size_t, std::size_t>> backward;

    // Walk both tx-sorted sides in lockstep, one transaction at a time.
    std::size_t i = 0, j = 0;
    while (i < ins.size() && j < outs.size()) {
        const TxId ti = ins[i].tx, to = outs[j].tx;
        if (ti < to) {
            while (i < ins.size() && ins[i].tx == ti) ++i;
            continue;
        }
        if (to < ti) {
            while (j < outs.size() && outs[j].tx == to) ++j;
            continue;
        }
        const std::size_t i_end = static_cast<std::size_t>(
            std::find_if(ins.begin() + static_cast<std::ptrdiff_t>(i), ins.end(),
                         [&](const UserFlow& f) { return f.tx != ti; }) - ins.begin());
        const std::size_t j_end = static_cast<std::size_t>(
            std::find_if(outs.begin() + static_cast<std::ptrdiff_t>(j), outs.end(),
                         [&](const UserFlow& f) { return f.tx != to; }) - outs.begin());
        for (std::size_t a = i; a < i_end; ++a) {
            const std::size_t u = g.index_of(ins[a].user);
            for (std::size_t b = j; b < j_end; ++b) {
                if (ins[a].user == outs[b].user) continue;
                const std::size_t v = g.index_of(outs[b].user);
                ++g.out_degree[u];
                ++g.in_degree[v];
                ++g.n_edge_instances;
                forward.emplace_back(u, v);
                backward.emplace_back(v, u);
            }
        }
        i = i_end;
        j = j_end;
    }
    fill_adjacency(std::move(forward), n, g.out_offsets, g.out_neighbors);
    fill_adjacency(std::move(backward), n, g.in_offsets, g.in_neighbors);
    return g;
}

UserGraph build_user_graph(const std::string& txin_path, const std::string& txout_path,
                           const AddressUserMap& map) {
    FlowReader inputs(txin_path, FlowSide::input);
    FlowReader outputs(txout_path, FlowSide::output);
    return build_user_graph(inputs, outputs, map);
}

AmountFeatures amount_features(const UserGraph& graph, std::size_t user) {
    const auto recv = side_stats(graph.received_totals(user));
    const auto sent = side_stats(graph.sent_totals(user));
    AmountFeatures f;
    f.avg_in = recv.mean;
    f.total_received = recv.total;
    f.std_received = recv.stddev;
    f.avg_out = sent.mean;
    f.total_sent = sent.total;
    f.std_sent = sent.stddev;
    return f;
}

NeighborhoodFeatures neighborhood_features(const UserGraph& graph, std::size_t user) {
    const auto in_nb = graph.in_neighbors_of(user);
    const auto out_nb = graph.out_neighbors_of(user);
    NeighborhoodFeatures f;
    f.nb_in_in = mean_degree(in_nb, graph.in_degree);
    f.nb_in_out = mean_degree(in_nb, graph.out_degree);
    f.nb_out_in = mean_degree(out_nb, graph.in_degree);
    f.nb_out_out = mean_degree(out_nb, graph.out_degree);
    return f;
}

FeatureMatrix assemble_feature_matrix(const UserGraph& graph, unsigned threads) {
    FeatureMatrix m;
    m.user_ids = graph.users;
    m.values.resize(static_cast<Eigen::Index>(graph.n_users()), kNumFeatures);
    parallel_for(graph.n_users(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t u = begin; u < end; ++u) {
            const auto a = amount_features(graph, u);
            const auto nb = neighborhood_features(graph, u);
            auto row = m.values.row(static_cast<Eigen::Index>(u));
            row << a.avg_in, a.avg_out, a.total_sent, a.total_received, a.std_received,
                a.std_sent, nb.nb_in_in, nb.nb_in_out, nb.nb_out_in, nb.nb_out_out;
        }
    });
    return m;
}

void write_features_csv(std::ostream& out, const FeatureMatrix& features) {
    out << "user_id";
    for (auto name : kFeatureNames) out << ',' << name;
    out << '\n';
    for (std::size_t r = 0; r < features.rows(); ++r) {
        out << features.user_ids[r];
        for (std::size_t c = 0; c < kNumFeatures; ++c)
            out << ',' << format_real(features.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        out << '\n';
    }
}

void write_features_csv(const std::string& path, const FeatureMatrix& features) {
    std::ostringstream ss;
    write_features_csv(ss, features);
    write_file(path, ss.str());
}

FeatureMatrix read_features_csv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
    {
        std::string expected = "user_id";
        for (auto name : kFeatureNames) (expected += ',') += name;
        if (line != expected) throw ParseError(source, 1, "unexpected header '" + line + "'");
    }
    std::vector<UserId> ids;
    std::vector<double> flat;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split(line, ',');
        if (fields.size() != kNumFeatures + 1)
            throw ParseError(source, line_no, "expected " + std::to_string(kNumFeatures + 1) + " columns");
        const auto id = parse_unsigned(fields[0]);
        if (!id) throw ParseError(source, line_no, "invalid user_id");
        if (!ids.empty() && *id <= ids.back())
            throw ParseError(source, line_no, "user ids must be strictly ascending");
        ids.push_back(*id);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            const auto v = parse_real(fields[c]);
            if (!v || !std::isfinite(*v) || *v < 0)
                throw ParseError(source, line_no, "invalid feature value '" + std::string(fields[c]) + "'");
            flat.push_back(*v);
        }
    }
    FeatureMatrix m;
    m.user_ids = std::move(ids);
    m.values = Eigen::Map<const FeatureValues>(flat.data(), static_cast<Eigen::Index>(m.user_ids.size()),
                                               kNumFeatures);
    return m;
}

FeatureMatrix read_features_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_features_csv(in, path);
}

}  // namespace txanomaly
