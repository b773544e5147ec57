#include <doctest.h>

#include "vvc/error.hpp"
#include "vvc/metrics.hpp"

using namespace vvc;

TEST_CASE("no violation inside the band") {
    const std::vector<double> v(360 * 3, 1.0);
    const std::vector<double> q(360 * 2, 0.0);
    const auto r = compute_metrics(v, 3, q, 2, 10.0, 0.9, 1.1);
    CHECK(r.violation_time_h == 0.0);
    CHECK(r.violation_energy_puh == 0.0);
    CHECK(r.max_violation_pu == 0.0);
    CHECK(r.duration_h == doctest::Approx(1.0));
    CHECK(r.voltage_histogram.total() == 360 * 3);
    CHECK(r.voltage_histogram.counts[50] == 360 * 3);
}

TEST_CASE("rectangle integrals") {
    // One bus at v_max + 0.01 for exactly one hour of 10 s records.
    std::vector<double> v(360 * 2, 1.0);
    for (std::size_t t = 0; t < 360; ++t) v[t * 2] = 1.06;
    std::vector<double> q(360, 10.0);
    for (std::size_t t = 0; t < 360; t += 2) q[t] = -10.0;
    const auto r = compute_metrics(v, 2, q, 1, 10.0, 0.95, 1.05);
    CHECK(r.violation_time_h == doctest::Approx(1.0));
    CHECK(r.violation_energy_puh == doctest::Approx(0.01));
    CHECK(r.max_violation_pu == doctest::Approx(0.01));
    CHECK(r.reactive_energy_kvarh == doctest::Approx(10.0));
}

TEST_CASE("undervoltage counts too, left-aligned records") {
    const std::vector<double> v{0.93, 1.0, 1.0, 1.0};
    const auto r = compute_metrics(v, 1, std::vector<double>(4, 0.0), 1, 900.0, 0.95, 1.05);
    CHECK(r.violation_time_h == doctest::Approx(0.25));
    CHECK(r.violation_energy_puh == doctest::Approx(0.02 * 0.25));
    CHECK(r.max_violation_pu == doctest::Approx(0.02));
}

TEST_CASE("histogram bins") {
    VoltageHistogram h;
    CHECK(h.bin_of(0.80) == 0);
    CHECK(h.bin_of(0.9) == 0);
    CHECK(h.bin_of(0.902) == 1);
    CHECK(h.bin_of(1.0) == 50);
    CHECK(h.bin_of(1.0999) == 99);
    CHECK(h.bin_of(1.3) == 99);
    const auto csv = histogram_to_csv(h);
    CHECK(csv.rfind("bin_low_pu,count\n0.9,0\n0.902,0\n", 0) == 0);
}

TEST_CASE("metrics JSON round trip and errors") {
    std::vector<double> v{1.07, 0.99, 1.0, 1.02};
    const auto r = compute_metrics(v, 2, std::vector<double>{3.0, -1.0}, 1, 10.0, 0.95, 1.05);
    CHECK(metrics_from_json(metrics_to_json(r)) == r);
    CHECK_THROWS_AS(metrics_from_json("{}"), ParseError);
    CHECK_THROWS_AS(compute_metrics(std::vector<double>{}, 2, std::vector<double>{}, 1, 10.0, 0.95, 1.05),
                    InvalidArgument);
    CHECK_THROWS_AS(compute_metrics(v, 3, std::vector<double>{}, 1, 10.0, 0.95, 1.05), InvalidArgument);
}
