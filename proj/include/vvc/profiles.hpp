#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace vvc {

/// Per-load-bus active load and PV generation on a uniform time grid.
struct ProfileSet {
    std::vector<std::int64_t> timestamps;  // epoch seconds, uniform spacing
    std::vector<int> buses;                // ascending bus ids
    std::vector<std::vector<double>> p_load_kw;  // [bus index][time]
    std::vector<std::vector<double>> p_pv_kw;

    std::size_t size() const { return timestamps.size(); }
    /// Spacing in seconds (0 for fewer than two samples).
    std::int64_t step() const { return timestamps.size() > 1 ? timestamps[1] - timestamps[0] : 0; }
    bool operator==(const ProfileSet&) const = default;
};

/// Throws ParseError (with line number) for ragged rows, non-uniform or
/// missing timestamps, negative power, or a malformed header. With
/// `downsample_window` > 1 consecutive windows are averaged (trailing
/// partial window dropped).
ProfileSet parse_profiles(std::istream& in, std::size_t downsample_window = 1);
ProfileSet load_profiles(const std::string& path, std::size_t downsample_window = 1);

/// Header `timestamp,p_load_kw_<bus>,p_pv_kw_<bus>,...`, shortest
/// round-trip decimal formatting, `\n` line ends.
void write_profiles(const ProfileSet& profiles, std::ostream& out);
void save_profiles(const ProfileSet& profiles, const std::string& path);

/// Mean over consecutive windows of `window` samples.
ProfileSet downsample(const ProfileSet& profiles, std::size_t window);

/// PV columns multiplied by `factor`; loads untouched.
ProfileSet apply_scenario(const ProfileSet& profiles, double factor);

struct SynthOptions {
    std::uint64_t seed = 42;
    int days = 1;
    std::vector<int> buses;
    std::vector<double> peak_load_kw;  // per bus
    std::vector<double> peak_pv_kw;    // per bus
    std::int64_t start = 1530489600;   // 2018-07-02T00:00:00Z
    std::int64_t step_s = 60;
};

/// Deterministic stand-in for measured household data: half-sine clear-sky
/// PV with multiplicative noise and cloud dips, double-peaked residential
/// load. Each series is rescaled so its maximum equals the requested peak.
ProfileSet synth_profiles(const SynthOptions& options);

/// Convenience: synthetic set calibrated to a network's load buses, with PV
/// peaks equal to the inverters' p_peak.
struct Network;
ProfileSet synth_for_network(const Network& network, std::uint64_t seed, int days);

}  // namespace vvc
