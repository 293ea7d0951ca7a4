#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "txanomaly/errors.hpp"
#include "txanomaly/features.hpp"

using namespace txanomaly;

namespace {

UserGraph graph_of(const std::vector<FlowRecord>& ins, const std::vector<FlowRecord>& outs,
                   const AddressUserMap& map = {}) {
    std::ostringstream a, b;
    write_flow_records(a, ins);
    write_flow_records(b, outs);
    std::istringstream ia(a.str()), ib(b.str());
    FlowReader ri(ia, FlowSide::input), ro(ib, FlowSide::output);
    return build_user_graph(ri, ro, map);
}

// Toy graph T1 with identity contraction: users 1, 2, 3 are addresses a1, a2, a3.
//   tx1: a1 pays 5e8 -> a2 3e8, a3 2e8
//   tx2: a2 pays 3e8 -> a3 3e8
const std::vector<FlowRecord> kT1In{{1, 1, 500'000'000}, {2, 2, 300'000'000}};
const std::vector<FlowRecord> kT1Out{{1, 2, 300'000'000}, {1, 3, 200'000'000}, {2, 3, 300'000'000}};

bool rel_close(double a, double b, double rel = 1e-9) {
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

struct RandomFlows {
    std::vector<FlowRecord> ins, outs;
};

RandomFlows random_flows(std::mt19937_64& rng, std::size_t n_tx, std::size_t n_addr) {
    RandomFlows f;
    for (TxId t = 0; t < n_tx; ++t) {
        const std::size_t n_in = rng() % 3, n_out = 1 + rng() % 3;
        for (std::size_t i = 0; i < n_in; ++i) f.ins.push_back({t, rng() % n_addr, rng() % 1'000'000'000});
        for (std::size_t i = 0; i < n_out; ++i) f.outs.push_back({t, rng() % n_addr, rng() % 1'000'000'000});
    }
    return f;
}

}  // namespace

TEST_CASE("T1 graph structure") {
    const auto g = graph_of(kT1In, kT1Out);
    REQUIRE(g.users == std::vector<UserId>{1, 2, 3});
    CHECK(g.n_edge_instances == 3);
    CHECK(g.in_degree == std::vector<std::uint64_t>{0, 1, 2});
    CHECK(g.out_degree == std::vector<std::uint64_t>{2, 1, 0});
    CHECK(std::vector<std::size_t>(g.out_neighbors_of(0).begin(), g.out_neighbors_of(0).end()) ==
          std::vector<std::size_t>{1, 2});
    CHECK(std::vector<std::size_t>(g.in_neighbors_of(2).begin(), g.in_neighbors_of(2).end()) ==
          std::vector<std::size_t>{0, 1});
}

TEST_CASE("T1 amount features") {
    const auto g = graph_of(kT1In, kT1Out);
    const auto u3 = amount_features(g, g.index_of(3));
    CHECK(rel_close(u3.total_received, 5.0e8));
    CHECK(rel_close(u3.avg_in, 2.5e8));
    CHECK(rel_close(u3.std_received, 5.0e7));
    CHECK(u3.total_sent == 0);
    CHECK(u3.avg_out == 0);
    CHECK(u3.std_sent == 0);

    const auto u1 = amount_features(g, g.index_of(1));
    CHECK(rel_close(u1.total_sent, 5.0e8));
    CHECK(rel_close(u1.avg_out, 5.0e8));
    CHECK(u1.std_sent == 0);
    CHECK(u1.total_received == 0);
    CHECK(u1.avg_in == 0);
    CHECK(u1.std_received == 0);
}

TEST_CASE("T1 neighborhood features") {
    const auto g = graph_of(kT1In, kT1Out);
    const auto u3 = neighborhood_features(g, g.index_of(3));
    CHECK(rel_close(u3.nb_in_in, 0.5));
    CHECK(rel_close(u3.nb_in_out, 1.5));
    CHECK(u3.nb_out_in == 0);
    CHECK(u3.nb_out_out == 0);
    const auto u1 = neighborhood_features(g, g.index_of(1));
    CHECK(rel_close(u1.nb_out_in, 1.5));
    CHECK(rel_close(u1.nb_out_out, 0.5));
    CHECK(u1.nb_in_in == 0);
    CHECK(u1.nb_in_out == 0);
}

TEST_CASE("T1 feature matrix layout") {
    const auto m = assemble_feature_matrix(graph_of(kT1In, kT1Out));
    REQUIRE(m.rows() == 3);
    CHECK(m.user_ids == std::vector<UserId>{1, 2, 3});
    CHECK(m.values.cols() == 10);
    // u2 receives 3e8 in tx1 and sends 3e8 in tx2; neighbors u1 (in) and u3 (out)
    CHECK(m.values(1, kAvgIn) == 3e8);
    CHECK(m.values(1, kAvgOut) == 3e8);
    CHECK(m.values(1, kNbInIn) == 0);
    CHECK(m.values(1, kNbInOut) == 2);
    CHECK(m.values(1, kNbOutIn) == 2);
    CHECK(m.values(1, kNbOutOut) == 0);
}

TEST_CASE("self payments count toward totals but add no edges") {
    const auto g = graph_of({{1, 5, 100}}, {{1, 5, 60}, {1, 5, 40}});
    CHECK(g.n_edge_instances == 0);
    const auto f = amount_features(g, 0);
    CHECK(f.total_received == 100);  // both rows of tx1 aggregate into one receipt
    CHECK(f.avg_in == 100);
    CHECK(f.total_sent == 100);
    const auto nb = neighborhood_features(g, 0);
    CHECK(nb.nb_in_in == 0);
    CHECK(nb.nb_out_out == 0);
}

TEST_CASE("contraction merges addresses into one node") {
    const auto map = AddressUserMap::from_pairs({{1, 1}, {2, 1}});
    const auto g = graph_of(kT1In, kT1Out, map);
    CHECK(g.users == std::vector<UserId>{1, 3});
    // tx1: {1} -> {1, 3}; tx2: {1} -> {3}
    CHECK(g.n_edge_instances == 2);
    CHECK(g.in_degree[1] == 2);
    CHECK(amount_features(g, 0).total_sent == 8e8);
}

TEST_CASE("one-sided transactions and empty input") {
    const auto g = graph_of({{1, 1, 10}}, {{2, 2, 7}});
    CHECK(g.n_edge_instances == 0);
    CHECK(amount_features(g, g.index_of(2)).avg_in == 7);
    CHECK(amount_features(g, g.index_of(2)).std_received == 0);

    const auto empty = assemble_feature_matrix(graph_of({}, {}));
    CHECK(empty.rows() == 0);
    CHECK(empty.values.cols() == 10);
}

TEST_CASE("feature invariants on random graphs") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 25; ++trial) {
        const auto flows = random_flows(rng, 1 + rng() % 60, 2 + rng() % 30);
        const auto g = graph_of(flows.ins, flows.outs);
        const auto m = assemble_feature_matrix(g);

        // conservation in exact satoshi
        Amount sum_in = 0, sum_out = 0, recv = 0, sent = 0;
        for (const auto& r : flows.ins) sum_in += r.value;
        for (const auto& r : flows.outs) sum_out += r.value;
        for (Amount v : g.received) recv += v;
        for (Amount v : g.sent) sent += v;
        CHECK(recv == sum_out);
        CHECK(sent == sum_in);

        std::uint64_t din = 0, dout = 0;
        for (auto d : g.in_degree) din += d;
        for (auto d : g.out_degree) dout += d;
        CHECK(din == g.n_edge_instances);
        CHECK(dout == g.n_edge_instances);

        CHECK(m.values.allFinite());
        CHECK((m.values.array() >= 0).all());
        CHECK((m.values.col(kAvgIn).array() <= m.values.col(kTotalReceived).array()).all());
        CHECK((m.values.col(kAvgOut).array() <= m.values.col(kTotalSent).array()).all());

        // permutation invariance: bit-identical
        auto ins = flows.ins, outs = flows.outs;
        std::shuffle(ins.begin(), ins.end(), rng);
        std::shuffle(outs.begin(), outs.end(), rng);
        const auto permuted = assemble_feature_matrix(graph_of(ins, outs));
        CHECK(permuted.user_ids == m.user_ids);
        CHECK(permuted.values == m.values);

        // scale equivariance
        const std::uint64_t c = 1 + rng() % 5000;
        for (auto& r : ins) r.value *= c;
        for (auto& r : outs) r.value *= c;
        const auto scaled = assemble_feature_matrix(graph_of(ins, outs));
        for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
            for (Eigen::Index col = 0; col < 6; ++col)
                CHECK(rel_close(scaled.values(r, col), m.values(r, col) * static_cast<double>(c)));
            for (Eigen::Index col = 6; col < 10; ++col) CHECK(scaled.values(r, col) == m.values(r, col));
        }

        // worker count does not matter
        CHECK(assemble_feature_matrix(g, 4).values == m.values);
    }
}

TEST_CASE("features.csv round trip is exact") {
    std::mt19937_64 rng(5);
    const auto flows = random_flows(rng, 40, 20);
    const auto m = assemble_feature_matrix(graph_of(flows.ins, flows.outs));
    std::ostringstream out;
    write_features_csv(out, m);
    std::istringstream in(out.str());
    const auto back = read_features_csv(in);
    CHECK(back.user_ids == m.user_ids);
    CHECK(back.values == m.values);
    std::ostringstream again;
    write_features_csv(again, back);
    CHECK(again.str() == out.str());
}

TEST_CASE("features.csv rejects malformed content") {
    std::istringstream bad_header("user,avg_in\n");
    CHECK_THROWS_AS(read_features_csv(bad_header), ParseError);
    std::istringstream short_row(
        "user_id,avg_in,avg_out,total_sent,total_received,std_received,std_sent,nb_in_in,nb_in_out,nb_out_in,"
        "nb_out_out\n1,2,3\n");
    CHECK_THROWS_AS(read_features_csv(short_row), ParseError);
}
