// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "opsize/csv.hpp"
#include "opsize/model.hpp"

// Model files come in two equivalent forms.
//
// Flat key-value (any extension except .json):
//
//   # comment
//   q = 4
//   J = 0.25
//   N = 1000
//   M = 20000
//   coupling = 1 1 0.125     # n_sys m_env V, repeatable
//
// JSON:
//
//   {"q": 4, "J": 0.25, "N": 1000, "M": 20000,
//    "couplings": [[1, 1, 0.125], [3, 1, 0.25]]}

namespace opsize {

inline void to_json(nlohmann::json& j, const ModelSpec& spec) {
    nlohmann::json couplings = nlohmann::json::array();
    for (const auto& c : spec.couplings)
        couplings.push_back({c.n_sys, c.m_env, c.strength});
    j = {{"q", spec.q}, {"J", spec.J}, {"N", spec.N}, {"M", spec.M}, {"couplings", couplings}};
}

inline void from_json(const nlohmann::json& j, ModelSpec& spec) {
    spec = ModelSpec{};
    spec.q = j.at("q").get<int>();
    spec.J = j.at("J").get<double>();
    spec.N = j.at("N").get<long>();
    spec.M = j.at("M").get<long>();
    spec.couplings.clear();
    if (j.contains("couplings"))
        for (const auto& c : j.at("couplings"))
            spec.couplings.push_back({c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<double>()});
}

inline ModelSpec parse_model_text(const std::string& text) {
    ModelSpec spec;
    spec.couplings.clear();
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw std::invalid_argument("model file line " + std::to_string(lineno) +
                                            ": expected 'key = value'");
            continue;
        }
        std::istringstream keys(line.substr(0, eq)), values(line.substr(eq + 1));
        std::string key;
        keys >> key;
        std::string extra;
        if (keys >> extra)
            throw std::invalid_argument("model file line " + std::to_string(lineno) +
                                        ": malformed key");
        bool ok = true;
        if (key == "q")
            ok = static_cast<bool>(values >> spec.q);
        else if (key == "J")
            ok = static_cast<bool>(values >> spec.J);
        else if (key == "N")
            ok = static_cast<bool>(values >> spec.N);
        else if (key == "M")
            ok = static_cast<bool>(values >> spec.M);
        else if (key == "coupling") {
            CouplingTerm c;
            ok = static_cast<bool>(values >> c.n_sys >> c.m_env >> c.strength);
            if (ok) spec.couplings.push_back(c);
        } else
            throw std::invalid_argument("model file line " + std::to_string(lineno) +
                                        ": unknown key '" + key + "'");
        if (!ok)
            throw std::invalid_argument("model file line " + std::to_string(lineno) +
                                        ": cannot parse value for '" + key + "'");
    }
    return spec;
}

inline std::string serialize_model_text(const ModelSpec& spec) {
    std::ostringstream out;
    out << "q = " << spec.q << "\n";
    out << "J = " << format_double(spec.J) << "\n";
    out << "N = " << spec.N << "\n";
    out << "M = " << spec.M << "\n";
    for (const auto& c : spec.couplings)
        out << "coupling = " << c.n_sys << " " << c.m_env << " " << format_double(c.strength)
            << "\n";
    return out.str();
}

inline ModelSpec load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("model file not found: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    if (std::filesystem::path(path).extension() == ".json")
        return nlohmann::json::parse(buffer.str()).get<ModelSpec>();
    return parse_model_text(buffer.str());
}

inline void save_model(const ModelSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    if (std::filesystem::path(path).extension() == ".json") {
        nlohmann::json j = spec;
        out << j.dump(2) << "\n";
    } else {
        out << serialize_model_text(spec);
    }
}

// FNV-1a over the canonical flat serialization with sorted couplings;
// stamped into every CSV artifact so files identify their model.
inline std::string model_hash(const ModelSpec& spec) {
    ModelSpec canon = spec;
    std::sort(canon.couplings.begin(), canon.couplings.end(),
              [](const CouplingTerm& a, const CouplingTerm& b) {
                  return std::pair{a.n_sys, a.m_env} < std::pair{b.n_sys, b.m_env};
              });
    const std::string text = serialize_model_text(canon);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace opsize
