#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vvc/error.hpp"
#include "vvc/grid.hpp"

namespace vvc {

using nlohmann::json;

namespace {

const char* to_string(BusKind k) {
    switch (k) {
        case BusKind::slack: return "slack";
        case BusKind::junction: return "junction";
        case BusKind::load: return "load";
    }
    return "junction";
}

BusKind bus_kind_from(const std::string& s) {
    if (s == "slack") return BusKind::slack;
    if (s == "junction") return BusKind::junction;
    if (s == "load") return BusKind::load;
    throw ParseError("unknown bus kind '" + s + "'");
}

BranchKind branch_kind_from(const std::string& s) {
    if (s == "line") return BranchKind::line;
    if (s == "transformer") return BranchKind::transformer;
    throw ParseError("unknown branch kind '" + s + "'");
}

}  // namespace

std::string network_to_json(const Network& network) {
    json j;
    j["f_nominal_hz"] = network.f_nominal_hz;
    j["s_base_kva"] = network.s_base_kva;
    j["v_min"] = network.v_min;
    j["v_max"] = network.v_max;
    j["buses"] = json::array();
    for (const auto& b : network.buses) {
        json jb{{"id", b.id}, {"nominal_v_volts", b.nominal_v}, {"kind", to_string(b.kind)}};
        if (b.nominal_load_kw != 0.0) jb["nominal_load_kw"] = b.nominal_load_kw;
        j["buses"].push_back(std::move(jb));
    }
    j["branches"] = json::array();
    for (const auto& br : network.branches) {
        json jb{{"from", br.from_bus},
                {"to", br.to_bus},
                {"r_ohm", br.r_ohm},
                {"x_ohm", br.x_ohm},
                {"kind", br.kind == BranchKind::transformer ? "transformer" : "line"}};
        if (br.rating_kva) jb["rating_kva"] = *br.rating_kva;
        j["branches"].push_back(std::move(jb));
    }
    j["inverters"] = json::array();
    for (const auto& inv : network.inverters) {
        j["inverters"].push_back(json{{"bus", inv.bus},
                                      {"p_peak_kw", inv.p_peak_kw},
                                      {"q_min_kvar", inv.q_min_kvar},
                                      {"q_max_kvar", inv.q_max_kvar}});
    }
    return j.dump(2) + "\n";
}

Network network_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("grid file: ") + e.what());
    }
    Network net;
    try {
        for (const auto& jb : j.at("buses")) {
            Bus b;
            b.id = jb.at("id").get<int>();
            b.nominal_v = jb.at("nominal_v_volts").get<double>();
            b.kind = bus_kind_from(jb.at("kind").get<std::string>());
            b.nominal_load_kw = jb.value("nominal_load_kw", 0.0);
            net.buses.push_back(b);
        }
        for (const auto& jb : j.at("branches")) {
            Branch br;
            br.from_bus = jb.at("from").get<int>();
            br.to_bus = jb.at("to").get<int>();
            br.r_ohm = jb.at("r_ohm").get<double>();
            br.x_ohm = jb.at("x_ohm").get<double>();
            br.kind = branch_kind_from(jb.at("kind").get<std::string>());
            if (jb.contains("rating_kva")) br.rating_kva = jb.at("rating_kva").get<double>();
            net.branches.push_back(br);
        }
        for (const auto& ji : j.at("inverters")) {
            net.inverters.push_back(Inverter{ji.at("bus").get<int>(), ji.at("p_peak_kw").get<double>(),
                                             ji.at("q_min_kvar").get<double>(), ji.at("q_max_kvar").get<double>()});
        }
        net.v_min = j.at("v_min").get<double>();
        net.v_max = j.at("v_max").get<double>();
        net.f_nominal_hz = j.at("f_nominal_hz").get<double>();
        net.s_base_kva = j.at("s_base_kva").get<double>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("grid file: ") + e.what());
    }
    return net;
}

Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open grid file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return network_from_json(ss.str());
}

void save_network(const Network& network, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << network_to_json(network);
}

}  // namespace vvc
