#include "txanomaly/report.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "txanomaly/errors.hpp"
#include "txanomaly/text.hpp"

namespace txanomaly {

using ojson = nlohmann::ordered_json;

std::vector<ClusterSummary> summarize(std::span<const std::size_t> labels,
                                      std::span<const double> distances, std::size_t k) {
    if (labels.size() != distances.size())
        throw std::invalid_argument("summarize: labels and distances differ in length");
    std::vector<ClusterSummary> out(k + 1);
    std::vector<double> sums(k + 1, 0.0);
    for (std::size_t l = 0; l <= k; ++l) out[l].label = l;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > k) throw ValidationError("summarize: label out of range");
        auto& s = out[labels[i]];
        ++s.size;
        sums[labels[i]] += distances[i];
        s.max_distance = std::max(s.max_distance, distances[i]);
    }
    const double n = static_cast<double>(labels.size());
    for (std::size_t l = 0; l <= k; ++l) {
        if (out[l].size == 0) continue;
        out[l].mean_distance = sums[l] / static_cast<double>(out[l].size);
        out[l].share = static_cast<double>(out[l].size) / n;
    }
    return out;
}

MatchCounts count_matches(std::span<const TheftMatch> matches) {
    std::set<UserId> users;
    std::set<AddrId> addrs;
    std::set<std::uint64_t> cases;
    MatchCounts c;
    for (const auto& m : matches) {
        if (m.absent()) {
            ++c.absent_entries;
            continue;
        }
        ++c.matched_entries;
        if (!m.flagged) continue;
        users.insert(m.user_id);
        addrs.insert(m.addr_id);
        cases.insert(m.case_id);
    }
    c.flagged_users = users.size();
    c.flagged_addresses = addrs.size();
    c.flagged_cases = cases.size();
    return c;
}

CatalogMatch match_catalog(const TheftCatalog& catalog, const AddressUserMap& map,
                           std::span<const UserId> user_ids, std::span<const std::size_t> labels,
                           const std::set<std::size_t>& flag_labels) {
    if (user_ids.size() != labels.size())
        throw std::invalid_argument("match_catalog: user ids and labels differ in length");
    CatalogMatch result;
    result.matches.reserve(catalog.size());
    for (const auto& e : catalog.entries()) {
        TheftMatch m;
        m.case_id = e.case_id;
        m.case_name = e.case_name;
        m.addr_id = e.addr_id;
        m.user_id = map.resolve(e.addr_id);
        const auto it = std::lower_bound(user_ids.begin(), user_ids.end(), m.user_id);
        if (it != user_ids.end() && *it == m.user_id) {
            m.label = labels[static_cast<std::size_t>(it - user_ids.begin())];
            m.flagged = flag_labels.count(*m.label) > 0;
        }
        result.matches.push_back(std::move(m));
    }
    result.counts = count_matches(result.matches);
    return result;
}

std::string report_to_json(const AnomalyReport& r) {
    ojson doc;
    doc["config"] = {{"k", r.config.k},
                     {"alpha", r.config.alpha},
                     {"n_starts", r.config.n_starts},
                     {"max_iter", r.config.max_iter},
                     {"tol", r.config.tol},
                     {"seed", r.config.seed},
                     {"flag_labels", r.config.flag_labels}};
    doc["stage_counts"] = {{"addresses_before_wipe", r.stages.addresses_before_wipe},
                           {"addresses_after_wipe", r.stages.addresses_after_wipe},
                           {"users_after_contraction", r.stages.users_after_contraction}};
    doc["counts"] = {{"users", r.counts.flagged_users},
                     {"addresses", r.counts.flagged_addresses},
                     {"cases", r.counts.flagged_cases},
                     {"matched_entries", r.counts.matched_entries},
                     {"absent_entries", r.counts.absent_entries}};
    doc["objective"] = r.objective;
    ojson summaries = ojson::array();
    for (const auto& s : r.summaries)
        summaries.push_back({{"label", s.label},
                             {"size", s.size},
                             {"share", s.share},
                             {"mean_distance", s.mean_distance},
                             {"max_distance", s.max_distance}});
    doc["clusters"] = std::move(summaries);
    ojson matches = ojson::array();
    for (const auto& m : r.matches) {
        ojson row = {{"case_id", m.case_id},
                     {"case_name", m.case_name},
                     {"addr_id", m.addr_id},
                     {"user_id", m.user_id}};
        row["label"] = m.label ? ojson(*m.label) : ojson(nullptr);
        row["absent"] = m.absent();
        row["flagged"] = m.flagged;
        matches.push_back(std::move(row));
    }
    doc["matches"] = std::move(matches);
    return doc.dump(2) + "\n";
}

AnomalyReport report_from_json(const std::string& text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        AnomalyReport r;
        const auto& cfg = doc.at("config");
        r.config.k = cfg.at("k").get<std::size_t>();
        r.config.alpha = cfg.at("alpha").get<double>();
        r.config.n_starts = cfg.at("n_starts").get<std::size_t>();
        r.config.max_iter = cfg.at("max_iter").get<std::size_t>();
        r.config.tol = cfg.at("tol").get<double>();
        r.config.seed = cfg.at("seed").get<std::uint64_t>();
        r.config.flag_labels = cfg.at("flag_labels").get<std::vector<std::size_t>>();
        const auto& st = doc.at("stage_counts");
        r.stages.addresses_before_wipe = st.at("addresses_before_wipe").get<std::uint64_t>();
        r.stages.addresses_after_wipe = st.at("addresses_after_wipe").get<std::uint64_t>();
        r.stages.users_after_contraction = st.at("users_after_contraction").get<std::uint64_t>();
        const auto& c = doc.at("counts");
        r.counts.flagged_users = c.at("users").get<std::size_t>();
        r.counts.flagged_addresses = c.at("addresses").get<std::size_t>();
        r.counts.flagged_cases = c.at("cases").get<std::size_t>();
        r.counts.matched_entries = c.at("matched_entries").get<std::size_t>();
        r.counts.absent_entries = c.at("absent_entries").get<std::size_t>();
        r.objective = doc.at("objective").get<double>();
        for (const auto& s : doc.at("clusters")) {
            ClusterSummary cs;
            cs.label = s.at("label").get<std::size_t>();
            cs.size = s.at("size").get<std::size_t>();
            cs.share = s.at("share").get<double>();
            cs.mean_distance = s.at("mean_distance").get<double>();
            cs.max_distance = s.at("max_distance").get<double>();
            r.summaries.push_back(cs);
        }
        for (const auto& m : doc.at("matches")) {
            TheftMatch tm;
            tm.case_id = m.at("case_id").get<std::uint64_t>();
            tm.case_name = m.at("case_name").get<std::string>();
            tm.addr_id = m.at("addr_id").get<AddrId>();
            tm.user_id = m.at("user_id").get<UserId>();
            if (!m.at("label").is_null()) tm.label = m.at("label").get<std::size_t>();
            tm.flagged = m.at("flagged").get<bool>();
            r.matches.push_back(std::move(tm));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed report.json: ") + e.what());
    }
}

std::string dispersion_csv(std::span<const UserId> user_ids, std::span<const std::size_t> labels,
                           std::span<const double> distances) {
    if (user_ids.size() != labels.size() || labels.size() != distances.size())
        throw std::invalid_argument("dispersion_csv: column lengths differ");
    std::ostringstream ss;
    ss << "user_id,label,distance\n";
    for (std::size_t i = 0; i < user_ids.size(); ++i)
        ss << user_ids[i] << ',' << labels[i] << ',' << format_real(distances[i]) << '\n';
    return ss.str();
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string matches_csv(std::span<const TheftMatch> matches) {
    std::ostringstream ss;
    ss << "case_id,case_name,addr_id,user_id,label,flagged\n";
    for (const auto& m : matches) {
        ss << m.case_id << ',' << csv_field(m.case_name) << ',' << m.addr_id << ',' << m.user_id << ',';
        if (m.label)
            ss << *m.label;
        else
            ss << "absent";
        ss << ',' << (m.flagged ? 1 : 0) << '\n';
    }
    return ss.str();
}

std::vector<std::string> emit_report(const AnomalyReport& report, std::span<const UserId> user_ids,
                                     std::span<const std::size_t> labels,
                                     std::span<const double> distances, const std::string& out_dir) {
    namespace fs = std::filesystem;
    const std::string report_path = (fs::path(out_dir) / "report.json").string();
    const std::string dispersion_path = (fs::path(out_dir) / "dispersion.csv").string();
    const std::string matches_path = (fs::path(out_dir) / "matches.csv").string();
    const auto dispersion = dispersion_csv(user_ids, labels, distances);
    write_file(report_path, report_to_json(report));
    write_file(dispersion_path, dispersion);
    write_file(matches_path, matches_csv(report.matches));
    return {report_path, dispersion_path, matches_path};
}

}  // namespace txanomaly
