#include "vvc/profiles.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "vvc/error.hpp"
#include "vvc/grid.hpp"
#include "vvc/kernels.hpp"

namespace vvc {
namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        const auto comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view s, std::size_t line, std::string_view what) {
    T value{};
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw ParseError("invalid " + std::string(what) + " '" + std::string(s) + "'", line);
    return value;
}

int parse_bus_suffix(std::string_view col, std::string_view prefix, std::size_t line) {
    if (col.substr(0, prefix.size()) != prefix)
        throw ParseError("expected column '" + std::string(prefix) + "<bus>', got '" + std::string(col) + "'", line);
    return parse_number<int>(col.substr(prefix.size()), line, "bus id");
}

}  // namespace

ProfileSet parse_profiles(std::istream& in, std::size_t downsample_window) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw ParseError("empty profile file", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split(line);
    if (header.empty() || header[0] != "timestamp") throw ParseError("first column must be 'timestamp'", 1);
    if ((header.size() - 1) % 2 != 0 || header.size() < 3)
        throw ParseError("expected pairs of p_load_kw_<bus>,p_pv_kw_<bus> columns", 1);

    ProfileSet ps;
    for (std::size_t c = 1; c < header.size(); c += 2) {
        const int bus = parse_bus_suffix(header[c], "p_load_kw_", 1);
        if (parse_bus_suffix(header[c + 1], "p_pv_kw_", 1) != bus)
            throw ParseError("load and PV columns of a pair must name the same bus", 1);
        if (!ps.buses.empty() && bus <= ps.buses.back()) throw ParseError("bus ids must be ascending", 1);
        ps.buses.push_back(bus);
    }
    ps.p_load_kw.resize(ps.buses.size());
    ps.p_pv_kw.resize(ps.buses.size());

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw ParseError("ragged row: " + std::to_string(cells.size()) + " fields, header has " +
                                 std::to_string(header.size()),
                             line_no);
        const auto ts = parse_number<std::int64_t>(cells[0], line_no, "timestamp");
        if (ps.timestamps.size() >= 2) {
            const auto expected = ps.timestamps.back() + ps.step();
            if (ts != expected)
                throw ParseError("timestamp gap: expected " + std::to_string(expected) + ", got " + std::to_string(ts),
                                 line_no);
        } else if (ps.timestamps.size() == 1 && ts <= ps.timestamps.back()) {
            throw ParseError("timestamps must be strictly increasing", line_no);
        }
        ps.timestamps.push_back(ts);
        for (std::size_t k = 0; k < ps.buses.size(); ++k) {
            const double load = parse_number<double>(cells[1 + 2 * k], line_no, "load value");
            const double pv = parse_number<double>(cells[2 + 2 * k], line_no, "PV value");
            if (load < 0.0 || pv < 0.0 || !std::isfinite(load) || !std::isfinite(pv))
                throw ParseError("negative or non-finite power at bus " + std::to_string(ps.buses[k]), line_no);
            ps.p_load_kw[k].push_back(load);
            ps.p_pv_kw[k].push_back(pv);
        }
    }
    if (ps.timestamps.empty()) throw ParseError("profile file has no data rows", line_no);
    return downsample_window > 1 ? downsample(ps, downsample_window) : ps;
}

ProfileSet load_profiles(const std::string& path, std::size_t downsample_window) {
    std::ifstream in(path);
    if (!in) throw ParseError("profiles not found: '" + path + "'");
    return parse_profiles(in, downsample_window);
}

void write_profiles(const ProfileSet& ps, std::ostream& out) {
    std::string buf = "timestamp";
    for (int b : ps.buses) buf += ",p_load_kw_" + std::to_string(b) + ",p_pv_kw_" + std::to_string(b);
    buf += '\n';
    out << buf;

    char num[64];
    auto append = [&](auto value) {
        const auto [ptr, ec] = std::to_chars(num, num + sizeof num, value);
        buf.append(num, ptr);
    };
    for (std::size_t t = 0; t < ps.size(); ++t) {
        buf.clear();
        append(ps.timestamps[t]);
        for (std::size_t k = 0; k < ps.buses.size(); ++k) {
            buf += ',';
            append(ps.p_load_kw[k][t]);
            buf += ',';
            append(ps.p_pv_kw[k][t]);
        }
        buf += '\n';
        out << buf;
    }
}

void save_profiles(const ProfileSet& profiles, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_profiles(profiles, out);
}

ProfileSet downsample(const ProfileSet& ps, std::size_t window) {
    if (window == 0) throw InvalidArgument("downsample window must be positive");
    if (window == 1) return ps;
    const std::size_t windows = ps.size() / window;
    ProfileSet out;
    out.buses = ps.buses;
    out.timestamps.reserve(windows);
    for (std::size_t w = 0; w < windows; ++w) out.timestamps.push_back(ps.timestamps[w * window]);
    const auto& k = kernels::active();
    auto reduce = [&](const std::vector<double>& src) {
        std::vector<double> dst(windows);
        k.window_mean(std::span<const double>(src.data(), windows * window), window, dst);
        return dst;
    };
    for (std::size_t b = 0; b < ps.buses.size(); ++b) {
        out.p_load_kw.push_back(reduce(ps.p_load_kw[b]));
        out.p_pv_kw.push_back(reduce(ps.p_pv_kw[b]));
    }
    return out;
}

ProfileSet apply_scenario(const ProfileSet& ps, double factor) {
    if (!(factor > 0.0)) throw InvalidArgument("scenario factor must be positive");
    ProfileSet out = ps;
    for (auto& series : out.p_pv_kw)
        for (auto& p : series) p *= factor;
    return out;
}

ProfileSet synth_profiles(const SynthOptions& o) {
    if (o.days < 1) throw InvalidArgument("synth_profiles: days must be >= 1");
    if (o.step_s <= 0 || 86400 % o.step_s != 0) throw InvalidArgument("synth_profiles: step must divide a day");
    if (o.peak_load_kw.size() != o.buses.size() || o.peak_pv_kw.size() != o.buses.size())
        throw InvalidArgument("synth_profiles: one peak per bus required");

    const std::size_t per_day = static_cast<std::size_t>(86400 / o.step_s);
    const std::size_t n = per_day * static_cast<std::size_t>(o.days);

    ProfileSet ps;
    ps.buses = o.buses;
    ps.timestamps.resize(n);
    for (std::size_t t = 0; t < n; ++t) ps.timestamps[t] = o.start + static_cast<std::int64_t>(t) * o.step_s;

    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    // Shared irradiance per day: all buses sit in one small neighbourhood.
    std::vector<double> irradiance(n, 0.0);
    constexpr double sunrise = 5.5, sunset = 20.5;  // hours
    for (int d = 0; d < o.days; ++d) {
        const double clearness = 0.75 + 0.25 * uni(rng);
        const int dips = static_cast<int>(uni(rng) * 4.0);
        std::vector<std::array<double, 3>> clouds;  // centre h, width h, depth
        for (int c = 0; c < dips; ++c)
            clouds.push_back({sunrise + (sunset - sunrise) * uni(rng), 0.1 + 0.6 * uni(rng), 0.2 + 0.5 * uni(rng)});
        for (std::size_t i = 0; i < per_day; ++i) {
            const double h = static_cast<double>(i) * static_cast<double>(o.step_s) / 3600.0;
            if (h <= sunrise || h >= sunset) continue;
            double g = clearness * std::sin(std::numbers::pi * (h - sunrise) / (sunset - sunrise));
            for (const auto& [centre, width, depth] : clouds) {
                const double z = (h - centre) / width;
                g *= 1.0 - depth * std::exp(-0.5 * z * z);
            }
            g *= 1.0 + 0.03 * gauss(rng);
            irradiance[static_cast<std::size_t>(d) * per_day + i] = std::max(0.0, g);
        }
    }

    auto rescale = [](std::vector<double>& s, double peak) {
        const double mx = s.empty() ? 0.0 : *std::max_element(s.begin(), s.end());
        const double f = mx > 0.0 ? peak / mx : 0.0;
        for (auto& x : s) x *= f;
    };

    for (std::size_t b = 0; b < o.buses.size(); ++b) {
        std::vector<double> pv(n);
        for (std::size_t t = 0; t < n; ++t) pv[t] = irradiance[t] * std::max(0.0, 1.0 + 0.02 * gauss(rng));
        rescale(pv, o.peak_pv_kw[b]);

        std::vector<double> load(n);
        const double morning = 7.0 + 0.5 * gauss(rng) * 0.5, evening = 19.0 + 0.5 * gauss(rng) * 0.5;
        for (std::size_t t = 0; t < n; ++t) {
            const double h = std::fmod(static_cast<double>(t) * static_cast<double>(o.step_s) / 3600.0, 24.0);
            const double zm = (h - morning) / 1.2, ze = (h - evening) / 2.0;
            const double shape = 0.3 + 0.45 * std::exp(-0.5 * zm * zm) + 0.7 * std::exp(-0.5 * ze * ze);
            load[t] = std::max(0.0, shape * (1.0 + 0.08 * gauss(rng)));
        }
        rescale(load, o.peak_load_kw[b]);

        ps.p_pv_kw.push_back(std::move(pv));
        ps.p_load_kw.push_back(std::move(load));
    }
    return ps;
}

ProfileSet synth_for_network(const Network& network, std::uint64_t seed, int days) {
    SynthOptions o;
    o.seed = seed;
    o.days = days;
    for (const auto& inv : network.inverters) {
        o.buses.push_back(inv.bus);
        o.peak_load_kw.push_back(network.buses.at(static_cast<std::size_t>(inv.bus)).nominal_load_kw);
        o.peak_pv_kw.push_back(inv.p_peak_kw);
    }
    // Ascending bus order for the CSV contract.
    std::vector<std::size_t> idx(o.buses.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return o.buses[a] < o.buses[b]; });
    SynthOptions sorted = o;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        sorted.buses[i] = o.buses[idx[i]];
        sorted.peak_load_kw[i] = o.peak_load_kw[idx[i]];
        sorted.peak_pv_kw[i] = o.peak_pv_kw[idx[i]];
    }
    return synth_profiles(sorted);
}

}  // namespace vvc
