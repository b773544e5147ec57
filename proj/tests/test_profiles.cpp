#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "vvc/error.hpp"
#include "vvc/grid.hpp"
#include "vvc/profiles.hpp"

using namespace vvc;

namespace {

ProfileSet parse(const std::string& text, std::size_t window = 1) {
    std::istringstream in(text);
    return parse_profiles(in, window);
}

std::size_t error_line(const std::string& text) {
    try {
        (void)parse(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

}  // namespace

TEST_CASE("minimal file") {
    const auto ps = parse("timestamp,p_load_kw_11,p_pv_kw_11\n0,1.5,0\n60,2,3.25\n");
    CHECK(ps.size() == 2);
    CHECK(ps.step() == 60);
    CHECK(ps.buses == std::vector<int>{11});
    CHECK(ps.p_load_kw[0] == std::vector<double>{1.5, 2.0});
    CHECK(ps.p_pv_kw[0] == std::vector<double>{0.0, 3.25});
}

TEST_CASE("malformed files report the line") {
    const std::string head = "timestamp,p_load_kw_1,p_pv_kw_1,p_load_kw_2,p_pv_kw_2\n";
    CHECK(error_line(head + "0,1,1,1,1\n60,1,1,1\n") == 3);
    CHECK(error_line(head + "0,1,1,1,1\n60,1,1,1,1\n180,1,1,1,1\n") == 4);
    CHECK(error_line(head + "0,1,1,1,1\n60,-1,1,1,1\n") == 3);
    CHECK(error_line(head + "0,1,1,1,x\n") == 2);
    CHECK(error_line("time,p_load_kw_1,p_pv_kw_1\n0,1,1\n") == 1);
    CHECK(error_line("timestamp,p_load_kw_2,p_pv_kw_2,p_load_kw_1,p_pv_kw_1\n0,1,1,1,1\n") == 1);
    CHECK(error_line("timestamp,p_load_kw_1,p_pv_kw_2\n0,1,1\n") == 1);
    CHECK(error_line(head) != 0);

    try {
        (void)parse(head + "0,1,1,1,1\n60,1,1,1,1\n180,1,1,1,1\n");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("gap") != std::string::npos);
        CHECK(std::string(e.what()).find("120") != std::string::npos);
    }
    CHECK_THROWS_WITH_AS(load_profiles("/nonexistent/p.csv"), doctest::Contains("profiles not found"), ParseError);
}

TEST_CASE("downsampling averages windows") {
    std::string text = "timestamp,p_load_kw_3,p_pv_kw_3\n";
    for (int t = 0; t < 125; ++t) text += std::to_string(t) + "," + std::to_string(t) + ",1\n";
    const auto ps = parse(text, 60);
    CHECK(ps.size() == 2);
    CHECK(ps.timestamps == std::vector<std::int64_t>{0, 60});
    CHECK(ps.p_load_kw[0][0] == doctest::Approx(29.5));
    CHECK(ps.p_load_kw[0][1] == doctest::Approx(89.5));
    CHECK(ps.p_pv_kw[0][1] == doctest::Approx(1.0));
    CHECK_THROWS_AS(downsample(ps, 0), InvalidArgument);
}

TEST_CASE("write/load round trip is exact") {
    const auto net = build_cigre_lv_residential();
    const auto ps = synth_for_network(net, 4, 1);
    std::ostringstream out;
    write_profiles(ps, out);
    CHECK(out.str().rfind("timestamp,p_load_kw_11,p_pv_kw_11,p_load_kw_15,p_pv_kw_15,", 0) == 0);
    CHECK(parse(out.str()) == ps);

    const auto path = (std::filesystem::temp_directory_path() / "vvc_profiles_rt.csv").string();
    save_profiles(ps, path);
    CHECK(load_profiles(path) == ps);
    std::filesystem::remove(path);
}

TEST_CASE("scenario scaling touches PV only") {
    const auto ps = synth_for_network(build_cigre_lv_residential(), 4, 1);
    CHECK(apply_scenario(ps, 1.0) == ps);
    const auto big = apply_scenario(ps, 3.5);
    CHECK(big.p_load_kw == ps.p_load_kw);
    for (std::size_t b = 0; b < ps.buses.size(); ++b)
        CHECK(*std::max_element(big.p_pv_kw[b].begin(), big.p_pv_kw[b].end()) ==
              3.5 * *std::max_element(ps.p_pv_kw[b].begin(), ps.p_pv_kw[b].end()));
    CHECK_THROWS_AS(apply_scenario(ps, 0.0), InvalidArgument);
}

TEST_CASE("synthetic generator") {
    SynthOptions o;
    o.buses = {1, 2, 3};
    o.peak_load_kw = {50.0, 20.0, 0.0};
    o.peak_pv_kw = {50.0, 0.0, 10.0};
    o.days = 2;
    const auto a = synth_profiles(o);
    CHECK(a == synth_profiles(o));
    o.seed = 43;
    CHECK_FALSE(a == synth_profiles(o));

    CHECK(a.size() == 2 * 1440);
    auto peak = [](const std::vector<double>& s) { return *std::max_element(s.begin(), s.end()); };
    CHECK(peak(a.p_pv_kw[0]) >= 49.0);
    CHECK(peak(a.p_pv_kw[0]) <= 51.0);
    CHECK(peak(a.p_load_kw[0]) >= 49.0);
    CHECK(peak(a.p_load_kw[0]) <= 51.0);
    CHECK(peak(a.p_pv_kw[1]) == 0.0);
    CHECK(peak(a.p_load_kw[2]) == 0.0);
    // Night: no PV.
    CHECK(a.p_pv_kw[0][0] == 0.0);
    CHECK(a.p_pv_kw[0][120] == 0.0);

    o.days = 0;
    CHECK_THROWS_AS(synth_profiles(o), InvalidArgument);
}

TEST_CASE("synthetic profiles satisfy the invariants for random parameters") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        SynthOptions o;
        o.seed = rng();
        o.days = 1 + trial % 3;
        const int n = 1 + trial % 5;
        for (int b = 0; b < n; ++b) {
            o.buses.push_back(2 * b + 1);
            o.peak_load_kw.push_back(100.0 * u(rng));
            o.peak_pv_kw.push_back(100.0 * u(rng));
        }
        const auto ps = synth_profiles(o);
        REQUIRE(ps.size() == static_cast<std::size_t>(o.days) * 1440);
        for (std::size_t t = 1; t < ps.size(); ++t) CHECK(ps.timestamps[t] - ps.timestamps[t - 1] == 60);
        for (int b = 0; b < n; ++b) {
            CHECK(ps.p_pv_kw[b].size() == ps.size());
            CHECK(*std::min_element(ps.p_pv_kw[b].begin(), ps.p_pv_kw[b].end()) >= 0.0);
            CHECK(*std::min_element(ps.p_load_kw[b].begin(), ps.p_load_kw[b].end()) >= 0.0);
            const double pv = *std::max_element(ps.p_pv_kw[b].begin(), ps.p_pv_kw[b].end());
            CHECK(std::abs(pv - o.peak_pv_kw[b]) <= 0.02 * o.peak_pv_kw[b] + 1e-12);
        }
        std::ostringstream out;
        write_profiles(ps, out);
        CHECK(parse(out.str()) == ps);
    }
}
