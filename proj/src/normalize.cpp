#include "txanomaly/normalize.hpp"

#include <json.hpp>

namespace txanomaly {

std::string scaler_to_json(const MinMaxScaler<double>& scaler, const std::vector<std::string>& names) {
    if (static_cast<Eigen::Index>(names.size()) != scaler.cols())
        throw std::invalid_argument("scaler_to_json: one name per column required");
    nlohmann::ordered_json cols = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < scaler.cols(); ++c) {
        nlohmann::ordered_json col;
        col["name"] = names[static_cast<std::size_t>(c)];
        col["min"] = scaler.min()(c);
        col["max"] = scaler.max()(c);
        cols.push_back(std::move(col));
    }
    nlohmann::ordered_json doc;
    doc["columns"] = std::move(cols);
    return doc.dump(2) + "\n";
}

MinMaxScaler<double> scaler_from_json(const std::string& text, std::vector<std::string>* names) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
        const auto& cols = doc.at("columns");
        Eigen::VectorXd lo(static_cast<Eigen::Index>(cols.size()));
        Eigen::VectorXd hi(static_cast<Eigen::Index>(cols.size()));
        if (names) names->clear();
        for (std::size_t i = 0; i < cols.size(); ++i) {
            lo(static_cast<Eigen::Index>(i)) = cols[i].at("min").get<double>();
            hi(static_cast<Eigen::Index>(i)) = cols[i].at("max").get<double>();
            if (names) names->push_back(cols[i].at("name").get<std::string>());
        }
        return MinMaxScaler<double>(std::move(lo), std::move(hi));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed scaler.json: ") + e.what());
    }
}

}  // namespace txanomaly
