#include <doctest.h>

#include <numeric>
#include <random>

#include "test_support.hpp"
#include "txanomaly/errors.hpp"
#include "txanomaly/report.hpp"
#include "txanomaly/text.hpp"

using namespace txanomaly;

TEST_CASE("summaries of the one-dimensional example") {
    // labels/distances of {0,1,2,100}, k=1, alpha=0.25 around center 1.0
    const std::vector<std::size_t> labels{1, 1, 1, 0};
    const std::vector<double> dist{1, 0, 1, 99};
    const auto s = summarize(labels, dist, 1);
    REQUIRE(s.size() == 2);
    CHECK(s[0].label == 0);
    CHECK(s[0].size == 1);
    CHECK(s[0].share == 0.25);
    CHECK(s[0].max_distance == 99);
    CHECK(s[1].size == 3);
    CHECK(s[1].share == 0.75);
    CHECK(s[1].mean_distance == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("summaries include empty clusters and shares sum to one") {
    const auto s = summarize(std::vector<std::size_t>{1, 1, 3}, std::vector<double>{0, 1, 2}, 4);
    REQUIRE(s.size() == 5);
    CHECK(s[0].size == 0);
    CHECK(s[2].size == 0);
    CHECK(s[4].size == 0);
    CHECK(s[2].mean_distance == 0);

    std::mt19937_64 rng(4);
    std::vector<std::size_t> labels(997);
    for (auto& l : labels) l = rng() % 9;
    const auto big = summarize(labels, std::vector<double>(labels.size(), 1.0), 8);
    double total = 0;
    std::size_t sizes = 0;
    for (const auto& c : big) {
        total += c.share;
        sizes += c.size;
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
    CHECK(sizes == labels.size());
}

TEST_CASE("catalog matching") {
    const TheftCatalog catalog({{14, "Linode Hacks", 924292},
                                {14, "Linode Hacks", 1095327},
                                {23, "Bitfloor Theft", 818018},
                                {1, "Stone Man Loss", 555}});
    const auto map = AddressUserMap::from_pairs({{924292, 135}, {1095327, 135}, {818018, 1914}});
    const std::vector<UserId> users{135, 1914};

    SUBCASE("trimmed user is flagged") {
        const auto m = match_catalog(catalog, map, users, std::vector<std::size_t>{0, 3});
        REQUIRE(m.matches.size() == 4);
        CHECK(m.matches[0].user_id == 135);
        CHECK(m.matches[0].label == std::optional<std::size_t>{0});
        CHECK(m.matches[0].flagged);
        CHECK(m.matches[2].label == std::optional<std::size_t>{3});
        CHECK_FALSE(m.matches[2].flagged);
        CHECK(m.matches[3].absent());
        CHECK_FALSE(m.matches[3].flagged);
        CHECK(m.counts.flagged_users == 1);
        CHECK(m.counts.flagged_addresses == 2);
        CHECK(m.counts.flagged_cases == 1);
        CHECK(m.counts.matched_entries + m.counts.absent_entries == catalog.size());
    }
    SUBCASE("flag set is configurable") {
        const auto m = match_catalog(catalog, map, users, std::vector<std::size_t>{0, 3}, {0, 3});
        CHECK(m.counts.flagged_users == 2);
        CHECK(m.counts.flagged_addresses == 3);
        CHECK(m.counts.flagged_cases == 2);
        CHECK(count_matches(m.matches) == m.counts);
    }
}

TEST_CASE("seven addresses of one user count once") {
    std::vector<TheftCaseEntry> entries;
    std::vector<std::pair<AddrId, UserId>> pairs;
    for (AddrId a : {924292, 1095327, 2000790, 2021669, 2720178, 4941747, 5679585}) {
        entries.push_back({14, "Linode Hacks", a});
        pairs.emplace_back(a, 135);
    }
    const auto m = match_catalog(TheftCatalog(entries), AddressUserMap::from_pairs(pairs),
                                 std::vector<UserId>{135}, std::vector<std::size_t>{0});
    CHECK(m.counts.flagged_users == 1);
    CHECK(m.counts.flagged_addresses == 7);
    CHECK(m.counts.flagged_cases == 1);
}

TEST_CASE("report emission round-trips and is deterministic") {
    AnomalyReport r;
    r.config = {8, 0.01, 10, 100, 1e-9, 42, {0}};
    r.stages = {13086527, 10800406, 5305678};
    r.objective = 1.0 / 3.0;
    r.summaries = summarize(std::vector<std::size_t>{0, 1, 2}, std::vector<double>{0.7, 0.1, 0.2}, 8);
    r.matches = {{14, "Linode, \"Hacks\"", 924292, 135, 0, true}, {1, "Stone Man Loss", 5, 5, std::nullopt, false}};
    r.counts = count_matches(r.matches);
    CHECK(report_from_json(report_to_json(r)) == r);

    testing::TempDir dir("report");
    const std::vector<UserId> users{1, 5, 135};
    const std::vector<std::size_t> labels{0, 1, 2};
    const std::vector<double> dist{0.7, 0.1, 0.2};
    const auto paths = emit_report(r, users, labels, dist, dir.path().string());
    REQUIRE(paths.size() == 3);
    const auto json = read_file(paths[0]);
    CHECK(json.find("\"users\": 1") != std::string::npos);
    CHECK(json.find("\"addresses\": 1") != std::string::npos);
    CHECK(json.find("\"cases\": 1") != std::string::npos);
    CHECK(report_from_json(json) == r);
    CHECK(read_file(paths[1]) == "user_id,label,distance\n1,0,0.7\n5,1,0.1\n135,2,0.2\n");
    CHECK(read_file(paths[2]) ==
          "case_id,case_name,addr_id,user_id,label,flagged\n"
          "14,\"Linode, \"\"Hacks\"\"\",924292,135,0,1\n"
          "1,Stone Man Loss,5,5,absent,0\n");
    emit_report(r, users, labels, dist, dir.path().string());
    CHECK(read_file(paths[0]) == json);

    CHECK_THROWS_AS(emit_report(r, users, labels, dist, "/nonexistent/dir"), IoError);
}
