#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "nlc/io.hpp"
#include "nlc/rng.hpp"
#include "nlc/schedule.hpp"

using namespace nlc;

TEST_CASE("ddpm schedule: T=2 direct evaluation") {
    const NoiseSchedule s = build_ddpm_schedule(2, 0.1, 0.1);
    REQUIRE(s.steps() == 2);
    // alpha_bar = (0.9, 0.81); stored largest-first
    CHECK(s.sigma(0) == doctest::Approx(std::sqrt(0.19 / 0.81)).epsilon(1e-14));
    CHECK(s.sigma(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(s.sigma(2) == 0.0);
    CHECK(s.alpha(2) == 1.0);
}

TEST_CASE("ddpm schedule: T=1000 endpoints against an independent product") {
    const NoiseSchedule s = build_ddpm_schedule(1000, 1e-4, 0.02);
    CHECK(s.sigma(0) >= 155.0);
    CHECK(s.sigma(0) <= 160.0);
    CHECK(s.sigma(999) == doctest::Approx(0.01).epsilon(1e-2));

    // reference: long double cumulative product
    long double alpha_bar = 1.0L;
    for (int t = 1; t <= 1000; ++t) {
        const long double beta = 1e-4L + (0.02L - 1e-4L) * (t - 1) / 999.0L;
        alpha_bar *= 1.0L - beta;
    }
    const double sigma_T = double(std::sqrt((1.0L - alpha_bar) / alpha_bar));
    CHECK(s.sigma(0) == doctest::Approx(sigma_T).epsilon(1e-10));
}

TEST_CASE("ddpm schedule: strict monotonicity and validation") {
    const NoiseSchedule s = build_ddpm_schedule(137, 3e-4, 0.015);
    for (size_t i = 1; i < s.steps(); ++i) {
        CHECK(s.sigma(i) < s.sigma(i - 1));
    }
    CHECK_THROWS_AS(build_ddpm_schedule(1, 1e-4, 0.02), Error);
    CHECK_THROWS_AS(build_ddpm_schedule(10, 0.0, 0.02), Error);
    CHECK_THROWS_AS(build_ddpm_schedule(10, 0.5, 0.2), Error);
    CHECK_THROWS_AS(build_ddpm_schedule(10, 0.5, 1.0), Error);
}

TEST_CASE("schedule: sigma/alpha consistency") {
    const NoiseSchedule schedules[] = {
        build_ddpm_schedule(1000, 1e-4, 0.02),
        build_edm_schedule(18, 0.002, 80.0, 7.0),
        make_custom_schedule({3.0, 1.0, 0.25}),
    };
    for (const auto& s : schedules) {
        for (size_t i = 0; i < s.steps(); ++i) {
            const double from_alpha = std::sqrt((1.0 - s.alpha(i)) / s.alpha(i));
            CHECK(std::fabs(s.sigma(i) - from_alpha) <= 1e-12 * std::max(1.0, s.sigma(i)));
        }
    }
}

TEST_CASE("subsample: identity, endpoints, uniform stride") {
    const NoiseSchedule full = build_ddpm_schedule(1000, 1e-4, 0.02);

    const NoiseSchedule same = subsample(full, 1000);
    CHECK(same.sigmas == full.sigmas);

    const NoiseSchedule two = subsample(full, 2);
    REQUIRE(two.steps() == 2);
    CHECK(two.sigma(0) == full.sigma(0));
    CHECK(two.sigma(1) == full.sigma(999));

    const NoiseSchedule ten = subsample(full, 10);
    REQUIRE(ten.steps() == 10);
    CHECK(ten.sigma(0) == full.sigma(0));
    CHECK(ten.sigma(9) == full.sigma(999));
    for (size_t i = 1; i < 10; ++i) {
        CHECK(ten.sigma(i) < ten.sigma(i - 1));
    }

    CHECK_THROWS_AS(subsample(full, 1), Error);
    CHECK_THROWS_AS(subsample(full, 1001), Error);
}

TEST_CASE("edm schedule: rho=1 is linear; endpoints exact") {
    const NoiseSchedule s = build_edm_schedule(3, 1.0, 3.0, 1.0);
    REQUIRE(s.steps() == 3);
    CHECK(s.sigma(0) == 3.0);
    CHECK(s.sigma(1) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s.sigma(2) == 1.0);

    const NoiseSchedule two = build_edm_schedule(2, 0.01, 5.0, 7.0);
    CHECK(two.sigma(0) == 5.0);
    CHECK(two.sigma(1) == 0.01);

    const NoiseSchedule karras = build_edm_schedule(18, 0.002, 80.0, 7.0);
    CHECK(karras.sigma(0) == 80.0);
    CHECK(karras.sigma(17) == 0.002);
    for (size_t i = 1; i < karras.steps(); ++i) {
        CHECK(karras.sigma(i) < karras.sigma(i - 1));
    }
}

TEST_CASE("dpm schedule: lambda definition and round trip") {
    const NoiseSchedule base = subsample(build_ddpm_schedule(1000, 1e-4, 0.02), 12);
    const DpmSchedule dpm = build_dpm_schedule(base);
    for (size_t i = 0; i < base.steps(); ++i) {
        // lambda equals log of the variance-preserving coefficient ratio
        const double a_vp = std::sqrt(base.alpha(i));
        const double s_vp = base.sigma(i) * a_vp;
        CHECK(std::fabs(dpm.lambda(i) - std::log(a_vp / s_vp)) <= 1e-12);
        if (i > 0) {
            CHECK(dpm.lambda(i) > dpm.lambda(i - 1));
        }
        CHECK(dpm.time_of_lambda(dpm.lambda(i)) == doctest::Approx(double(i)).epsilon(1e-12));
        CHECK(dpm.sigma_of_lambda(dpm.lambda(i)) ==
              doctest::Approx(base.sigma(i)).epsilon(1e-12));
    }
}

TEST_CASE("lookup table: constant residuals") {
    std::vector<std::pair<double, double>> records;
    Rng rng(1);
    for (int i = 0; i < 500; ++i) {
        records.emplace_back(rng.uniform(0.01, 50.0), 0.25);
    }
    const LookupTable table = build_lookup_table(records, 16);
    for (size_t b = 0; b < table.bins(); ++b) {
        if (table.counts[b] > 0) {
            CHECK(table.mean_r[b] == doctest::Approx(0.25).epsilon(1e-12));
            CHECK(table.std_r[b] <= 1e-9);
        }
    }
    CHECK(table.query(1.0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("lookup table: disjoint clusters land in their own bins") {
    std::vector<std::pair<double, double>> records;
    for (int i = 0; i < 100; ++i) {
        records.emplace_back(0.1, -0.2);
        records.emplace_back(10.0, 0.3);
    }
    const LookupTable table = build_lookup_table(records, 2);
    REQUIRE(table.counts[0] == 100);
    REQUIRE(table.counts[1] == 100);
    CHECK(table.mean_r[0] == doctest::Approx(-0.2));
    CHECK(table.mean_r[1] == doctest::Approx(0.3));
}

TEST_CASE("lookup table: query semantics") {
    std::vector<std::pair<double, double>> records;
    for (int i = 0; i < 50; ++i) {
        records.emplace_back(0.1, -0.1);
        records.emplace_back(1.0, 0.0);
        records.emplace_back(10.0, 0.2);
    }
    const LookupTable table = build_lookup_table(records, 3);
    REQUIRE(table.counts[0] > 0);
    REQUIRE(table.counts[1] > 0);
    REQUIRE(table.counts[2] > 0);

    // bin centers reproduce the recorded means exactly
    for (size_t b = 0; b < 3; ++b) {
        CHECK(table.query(table.center(b)) == doctest::Approx(table.mean_r[b]).epsilon(1e-12));
    }
    // clamped below and above the populated range
    CHECK(table.query(1e-6) == doctest::Approx(table.mean_r[0]));
    CHECK(table.query(1e6) == doctest::Approx(table.mean_r[2]));
    // halfway in log-sigma between adjacent centers -> arithmetic mean
    const double mid = std::sqrt(table.center(0) * table.center(1));
    CHECK(table.query(mid) ==
          doctest::Approx(0.5 * (table.mean_r[0] + table.mean_r[1])).epsilon(1e-12));
    // output always within the populated mean range
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        const double q = table.query(rng.uniform(1e-4, 1e4));
        CHECK(q >= -0.1 - 1e-12);
        CHECK(q <= 0.2 + 1e-12);
    }
}

TEST_CASE("lookup table: empty records rejected, json round trip") {
    CHECK_THROWS_AS(build_lookup_table({}, 8), Error);

    std::vector<std::pair<double, double>> records;
    Rng rng(3);
    for (int i = 0; i < 300; ++i) {
        records.emplace_back(std::exp(rng.uniform(-4.0, 4.0)), rng.gaussian() * 0.1);
    }
    const LookupTable table = build_lookup_table(records, 64);
    const auto path =
        (std::filesystem::temp_directory_path() / "nlc_test_lut.json").string();
    save_lookup_table(table, path);
    const LookupTable loaded = load_lookup_table(path);
    CHECK(loaded.edges == table.edges);
    CHECK(loaded.mean_r == table.mean_r);
    CHECK(loaded.std_r == table.std_r);
    CHECK(loaded.counts == table.counts);
    std::filesystem::remove(path);
}
