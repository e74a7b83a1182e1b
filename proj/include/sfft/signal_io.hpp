#pragma once

// JSON persistence for sparse signals:
//   {"n": int, "modes": [{"omega": int, "re": float, "im": float}, ...]}

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sfft/errors.hpp"
#include "sfft/signal_model.hpp"

namespace sfft {

inline nlohmann::json modes_to_json(std::span<const Mode> modes) {
    auto arr = nlohmann::json::array();
    for (const auto& m : modes) arr.push_back({{"omega", m.omega}, {"re", m.coeff.real()}, {"im", m.coeff.imag()}});
    return arr;
}

inline nlohmann::json signal_to_json(const SparseSignal& sig) {
    return {{"n", sig.bandwidth()}, {"modes", modes_to_json(sig.modes())}};
}

inline SparseSignal signal_from_json(const nlohmann::json& j) {
    try {
        const auto n = j.at("n").get<std::int64_t>();
        std::vector<Mode> modes;
        for (const auto& m : j.at("modes")) {
            modes.push_back(Mode{m.at("omega").get<std::int64_t>(),
                                 cplx{m.at("re").get<double>(), m.at("im").get<double>()}});
        }
        return SparseSignal(n, std::move(modes));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("malformed signal document: ") + e.what());
    }
}

inline std::string dump_signal(const SparseSignal& sig) { return signal_to_json(sig).dump(2) + "\n"; }

inline SparseSignal parse_signal(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("signal file is not valid JSON: ") + e.what());
    }
    return signal_from_json(j);
}

inline void save_signal(const SparseSignal& sig, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << dump_signal(sig);
    if (!out) throw Error("write to '" + path + "' failed");
}

inline SparseSignal load_signal(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_signal(ss.str());
}

} // namespace sfft
