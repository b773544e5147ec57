#include "vvc/export.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vvc/error.hpp"

namespace vvc {
namespace {

void append_double(std::string& out, double x) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    out.append(buf, ptr);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> f;
    for (std::size_t pos; (pos = line.find(',')) != std::string_view::npos; line.remove_prefix(pos + 1))
        f.push_back(line.substr(0, pos));
    f.push_back(line);
    return f;
}

template <typename T>
T parse_field(std::string_view s, std::size_t line) {
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError("invalid number '" + std::string(s) + "'", line);
    return value;
}

std::string long_csv(const SimulationResult& r, const char* header, const std::vector<int>& ids,
                     const std::vector<double>& block) {
    std::string out = header;
    out += '\n';
    const std::size_t width = ids.size();
    for (std::size_t t = 0; t < r.size(); ++t) {
        const std::string ts = std::to_string(r.timestamps[t]) + ',';
        for (std::size_t i = 0; i < width; ++i) {
            out += ts;
            out += std::to_string(ids[i]);
            out += ',';
            append_double(out, block[t * width + i]);
            out += '\n';
        }
    }
    return out;
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

std::string voltages_to_csv(const SimulationResult& r) { return long_csv(r, "timestamp,bus,v_pu", r.buses, r.v_pu); }

std::string setpoints_to_csv(const SimulationResult& r) {
    return long_csv(r, "timestamp,inverter_bus,q_kvar", r.inverter_buses, r.q_kvar);
}

std::vector<LongRow> long_csv_rows(const std::string& text, const std::string& header) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != header) throw ParseError("expected header '" + header + "'", 1);
    std::vector<LongRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 3) throw ParseError("expected 3 fields", line_no);
        rows.push_back({parse_field<std::int64_t>(f[0], line_no), parse_field<int>(f[1], line_no),
                        parse_field<double>(f[2], line_no)});
    }
    return rows;
}

std::string capacity_to_json(const std::vector<CapacityResult>& sweeps) {
    nlohmann::ordered_json j;
    j["v_max_pu"] = sweeps.empty() ? 0.0 : sweeps.front().v_max_pu;
    nlohmann::ordered_json ctrls = nlohmann::ordered_json::object();
    for (const auto& s : sweeps) {
        nlohmann::ordered_json c;
        c["capacity_kw"] = s.capacity_kw ? nlohmann::ordered_json(*s.capacity_kw) : nlohmann::ordered_json(nullptr);
        auto levels = nlohmann::ordered_json::array();
        for (const auto& l : s.levels)
            levels.push_back({{"p_per_bus_kw", l.p_per_bus_kw},
                              {"p_total_kw", l.p_total_kw},
                              {"max_v_pu", l.max_v_pu},
                              {"substeps", l.substeps},
                              {"steady", l.steady}});
        c["levels"] = levels;
        ctrls[std::string(to_string(s.controller))] = c;
    }
    j["controllers"] = ctrls;
    return j.dump(2) + "\n";
}

std::vector<CapacityResult> capacity_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::ordered_json::parse(text);
        std::vector<CapacityResult> out;
        for (const auto& [name, c] : j.at("controllers").items()) {
            CapacityResult r;
            r.controller = controller_kind_from(name);
            r.v_max_pu = j.at("v_max_pu").get<double>();
            if (!c.at("capacity_kw").is_null()) r.capacity_kw = c.at("capacity_kw").get<double>();
            for (const auto& l : c.at("levels"))
                r.levels.push_back({l.at("p_per_bus_kw").get<double>(), l.at("p_total_kw").get<double>(),
                                    l.at("max_v_pu").get<double>(), l.at("substeps").get<int>(),
                                    l.at("steady").get<bool>()});
            out.push_back(std::move(r));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("capacity: ") + e.what());
    }
}

std::string capacity_levels_to_csv(const std::vector<CapacityResult>& sweeps) {
    std::string out = "controller,p_per_bus_kw,p_total_kw,max_v_pu,substeps,steady\n";
    for (const auto& s : sweeps)
        for (const auto& l : s.levels) {
            out += std::string(to_string(s.controller)) + ',';
            append_double(out, l.p_per_bus_kw);
            out += ',';
            append_double(out, l.p_total_kw);
            out += ',';
            append_double(out, l.max_v_pu);
            out += ',' + std::to_string(l.substeps) + ',' + (l.steady ? "1" : "0") + '\n';
        }
    return out;
}

std::string sensitivity_to_csv(const SensitivityMatrix& h) {
    std::string out = "bus";
    for (int c : h.col_buses) out += ',' + std::to_string(c);
    out += '\n';
    for (Eigen::Index i = 0; i < h.h.rows(); ++i) {
        out += std::to_string(h.row_buses[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < h.h.cols(); ++j) {
            out += ',';
            append_double(out, h.h(i, j));
        }
        out += '\n';
    }
    return out;
}

SensitivityMatrix sensitivity_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty sensitivity file", 1);
    const auto head = split(line);
    if (head.size() < 2 || head[0] != "bus") throw ParseError("expected header 'bus,<inverter bus ids>'", 1);
    SensitivityMatrix s;
    s.operating_point = "file";
    for (std::size_t i = 1; i < head.size(); ++i) s.col_buses.push_back(parse_field<int>(head[i], 1));
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != head.size()) throw ParseError("ragged sensitivity row", line_no);
        s.row_buses.push_back(parse_field<int>(f[0], line_no));
        std::vector<double> row;
        for (std::size_t i = 1; i < f.size(); ++i) row.push_back(parse_field<double>(f[i], line_no));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("sensitivity file has no rows", line_no);
    s.h.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(s.col_buses.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            s.h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    // A unit matrix on the inverter buses is the identity substitute.
    if (s.row_buses == s.col_buses && s.h.isIdentity(0.0)) s.operating_point = "identity";
    return s;
}

}  // namespace vvc
