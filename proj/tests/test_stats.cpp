#include <doctest.h>

#include <cmath>

#include "airquant/stats.hpp"
#include "testutil.hpp"

using namespace airquant;

TEST_CASE("ln_gamma against factorials and half-integers") {
    // reference values computed at 30-digit precision
    struct Row { double x, v; };
    const Row rows[] = {
        {0.5, 0.57236494292470009},
        {1, 0.0},
        {2, 0.0},
        {11, 15.104412573075515},
        {52.5, 154.38281063467163},
        {106, 386.91254912321755},
    };
    for (const auto& r : rows)
        CHECK(ln_gamma(r.x) == doctest::Approx(r.v).epsilon(1e-12));
    CHECK(ln_gamma(11) == doctest::Approx(std::log(3628800.0)).epsilon(1e-12));
    CHECK_THROWS_AS(ln_gamma(0.0), ConfigError);
}

TEST_CASE("regularized incomplete beta against high-precision references") {
    struct Row { double x, a, b, v; };
    const Row rows[] = {
        {0.5, 0.5, 0.5, 0.5},
        {0.25, 2, 3, 0.26171875},
        {0.75, 2, 3, 0.94921875},
        {0.1, 5, 1.5, 2.5917092737191243e-5},
        {0.9, 1.5, 5, 0.99997408290726281},
        {0.5, 52, 0.5, 2.4284437431685213e-17},
        {0.987, 52, 0.5, 0.24451991196968798},
        {0.3, 10, 10, 0.032553356881300948},
        {0.999, 0.5, 0.5, 0.9798649583666225},
        {0.42, 7, 0.5, 0.00060835323935838593},
    };
    for (const auto& r : rows) {
        const double got = regularized_incomplete_beta(r.x, r.a, r.b);
        CHECK(std::abs(got - r.v) <= 1e-9 * std::max(1.0, std::abs(r.v)));
    }
    // symmetry at x = 0.5, a = b
    for (double a : {0.5, 1.0, 3.5, 10.0})
        CHECK(regularized_incomplete_beta(0.5, a, a) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(0.0, 2, 3) == 0.0);
    CHECK(regularized_incomplete_beta(1.0, 2, 3) == 1.0);
    CHECK_THROWS_AS(regularized_incomplete_beta(1.5, 2, 3), ConfigError);
}

TEST_CASE("normal inverse cdf against high-precision references") {
    struct Row { double q, z; };
    const Row rows[] = {
        {0.5, 0.0},
        {0.975, 1.9599639845400539},
        {0.025, -1.9599639845400542},
        {0.9, 1.2815515655446006},
        {0.001, -3.0902323061678135},
        {0.999999, 4.7534243088170878},
        {1e-10, -6.3613409024040562},
        {0.3, -0.52440051270804082},
    };
    for (const auto& r : rows)
        CHECK(std::abs(normal_inverse_cdf(r.q) - r.z) <= 1e-9);
    // inverse of the cdf
    for (double q : {0.01, 0.2, 0.5, 0.77, 0.999})
        CHECK(normal_cdf(normal_inverse_cdf(q)) == doctest::Approx(q).epsilon(1e-12));
    CHECK_THROWS_AS(normal_inverse_cdf(0.0), ConfigError);
    CHECK_THROWS_AS(normal_inverse_cdf(1.0), ConfigError);
}

TEST_CASE("t_test_summary reproduces printed Table 2 and Table 1 values") {
    // Table 2 RUL row
    const TestResult rul = t_test_summary({79, 3815.58, 1389.97}, {27, 4683.04, 1657.47});
    CHECK(rul.df == 104.0);
    CHECK(rul.p == doctest::Approx(0.009).epsilon(0.15));
    CHECK(std::abs(rul.p - 0.008986) < 1e-4);

    // Table 1 age row
    const TestResult age = t_test_summary({79, 38.90, 13.28}, {27, 49.07, 13.22});
    CHECK(std::abs(age.p - 0.001) < 0.0015);
    CHECK(age.statistic > 0);

    // identical summaries
    const TestResult same = t_test_summary({10, 5.0, 2.0}, {10, 5.0, 2.0});
    CHECK(same.statistic == 0.0);
    CHECK(same.p == doctest::Approx(1.0));
}

TEST_CASE("t_test_summary degenerate zero-variance conventions") {
    const TestResult eq = t_test_summary({5, 3.0, 0.0}, {7, 3.0, 0.0});
    CHECK(eq.degenerate);
    CHECK(eq.p == 1.0);
    const TestResult ne = t_test_summary({5, 3.0, 0.0}, {7, 4.0, 0.0});
    CHECK(ne.degenerate);
    CHECK(ne.p == 0.0);
    CHECK_THROWS_AS(t_test_summary({1, 0, 0}, {5, 0, 1}), DegenerateError);
}

TEST_CASE("t test invariances") {
    const SummaryStat a{20, 12.5, 3.1}, b{14, 10.2, 2.4};
    const TestResult ab = t_test_summary(a, b);
    const TestResult ba = t_test_summary(b, a);
    CHECK(ab.statistic == doctest::Approx(-ba.statistic).epsilon(1e-12));
    CHECK(ab.p == doctest::Approx(ba.p).epsilon(1e-12));

    // scale invariance
    const double c = 37.25;
    const TestResult scaled =
        t_test_summary({a.n, a.mean * c, a.sd * c}, {b.n, b.mean * c, b.sd * c});
    CHECK(scaled.statistic == doctest::Approx(ab.statistic).epsilon(1e-12));
    CHECK(scaled.p == doctest::Approx(ab.p).epsilon(1e-12));
}

TEST_CASE("t_test_raw pooled agrees with t_test_summary; welch matches reference") {
    const std::vector<double> a = {4.1, 5.2, 6.3, 3.9, 5.5, 4.8, 5.1, 6.0, 4.4, 5.9};
    const std::vector<double> b = {6.2, 7.1, 5.9, 6.8, 7.4, 6.5, 7.0, 6.1, 7.7, 6.9};

    const TestResult pooled = t_test_raw(a, b, TVariant::Pooled);
    const TestResult via_summary = t_test_summary(summarize(a), summarize(b));
    CHECK(pooled.statistic == doctest::Approx(via_summary.statistic).epsilon(1e-15));
    CHECK(pooled.p == doctest::Approx(via_summary.p).epsilon(1e-15));

    // cross-implementation reference (scipy.stats.ttest_ind):
    //   pooled: t = 5.15190307, p = 6.69060850e-05
    //   welch:  t = 5.15190307, p = 9.26317192e-05, df = 16.208520
    CHECK(std::abs(pooled.statistic - 5.15190307) < 1e-7);
    CHECK(std::abs(pooled.p - 6.6906085e-05) < 1e-10);
    const TestResult welch = t_test_raw(a, b, TVariant::Welch);
    CHECK(std::abs(welch.p - 9.26317192e-05) < 1e-10);
    CHECK(std::abs(welch.df - 16.208520) < 1e-5);

    const std::vector<double> same = {1.0, 2.0, 3.0};
    CHECK(t_test_raw(same, same).p == doctest::Approx(1.0));
    CHECK_THROWS_AS(t_test_raw({1.0}, same), DegenerateError);
}

TEST_CASE("fisher exact on the paper's gender table") {
    const FisherResult r = fisher_exact_2x2(4, 75, 2, 25);
    CHECK(std::abs(r.one_sided.p - 0.480) < 0.001);   // printed Table 1 value
    CHECK(std::abs(r.two_sided.p - 0.6433) < 0.0015); // minimum-likelihood two-sided
}

TEST_CASE("fisher exact two-sided equals brute-force enumeration") {
    // margins fixed: k in [max(0, c0-r1), min(c0, r0)]
    auto brute = [](long long a, long long b, long long c, long long d) {
        const long long r0 = a + b, r1 = c + d, c0 = a + c;
        auto lnchoose = [](long long n, long long k) {
            return std::lgamma(double(n + 1)) - std::lgamma(double(k + 1)) -
                   std::lgamma(double(n - k + 1));
        };
        const long long lo = std::max(0LL, c0 - r1), hi = std::min(c0, r0);
        const double ln_den = lnchoose(r0 + r1, c0);
        const double p_obs = std::exp(lnchoose(r0, a) + lnchoose(r1, c0 - a) - ln_den);
        double sum = 0;
        for (long long k = lo; k <= hi; ++k) {
            const double pk = std::exp(lnchoose(r0, k) + lnchoose(r1, c0 - k) - ln_den);
            if (pk <= p_obs * (1 + 1e-7)) sum += pk;
        }
        return sum;
    };
    const long long tables[][4] = {
        {4, 75, 2, 25}, {24, 55, 15, 12}, {8, 71, 2, 25}, {1, 9, 9, 1}, {5, 0, 0, 5},
    };
    for (const auto& t : tables) {
        const FisherResult r = fisher_exact_2x2(t[0], t[1], t[2], t[3]);
        CHECK(r.two_sided.p == doctest::Approx(brute(t[0], t[1], t[2], t[3])).epsilon(1e-10));
        CHECK(r.one_sided.p >= 0.0);
        CHECK(r.one_sided.p <= 1.0);
        CHECK(r.two_sided.p <= 1.0);
    }
}

TEST_CASE("fisher exact musculoskeletal row matches the printed 0.023 two-sided") {
    const FisherResult r = fisher_exact_2x2(24, 55, 15, 12);
    CHECK(std::abs(r.two_sided.p - 0.023) < 0.002);
}

TEST_CASE("fisher exact degenerate and symmetry properties") {
    // degenerate column: a=c=0 -> single possible table -> p = 1
    const FisherResult r = fisher_exact_2x2(0, 12, 0, 9);
    CHECK(r.one_sided.p == doctest::Approx(1.0));
    CHECK(r.two_sided.p == doctest::Approx(1.0));

    CHECK_THROWS_AS(fisher_exact_2x2(0, 0, 0, 0), DegenerateError);
    CHECK_THROWS_AS(fisher_exact_2x2(-1, 2, 3, 4), ConfigError);

    // swapping both rows and both columns leaves p-values unchanged
    const FisherResult ab = fisher_exact_2x2(7, 3, 2, 8);
    const FisherResult swapped = fisher_exact_2x2(8, 2, 3, 7);
    CHECK(ab.two_sided.p == doctest::Approx(swapped.two_sided.p).epsilon(1e-12));
    CHECK(ab.one_sided.p == doctest::Approx(swapped.one_sided.p).epsilon(1e-12));
}

TEST_CASE("shapiro-wilk accepts normal and rejects exponential data") {
    int accept_normal = 0;
    int reject_exp = 0;
    for (int seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(1000 + seed);
        std::vector<double> normal(500);
        for (auto& v : normal) v = testutil::normal01(rng);
        const TestResult rn = shapiro_wilk(normal);
        CHECK(rn.statistic > 0.0);
        CHECK(rn.statistic <= 1.0);
        if (rn.p > 0.05) ++accept_normal;

        std::vector<double> expo(500);
        for (auto& v : expo) v = -std::log(1.0 - testutil::uniform01(rng));
        const TestResult re = shapiro_wilk(expo);
        if (re.p < 0.01) ++reject_exp;
    }
    CHECK(accept_normal >= 90);
    CHECK(reject_exp >= 95);
}

TEST_CASE("shapiro-wilk published example and contract errors") {
    // Royston's AS R94 driver data: W = 0.83467, p = 0.000914
    const std::vector<double> x = {
        .139, .157, .175, .256, .344,  .413,  .503, .577, .614, .655, .954, 1.392,
        1.557, 1.648, 1.690, 1.994, 2.174, 2.206, 3.245, 3.510, 3.571, 4.354,
        4.980, 6.084, 8.351};
    const TestResult r = shapiro_wilk(x);
    CHECK(r.statistic == doctest::Approx(0.83467).epsilon(2e-4));
    CHECK(r.p == doctest::Approx(0.000914).epsilon(0.05));

    CHECK_THROWS_AS(shapiro_wilk({1.0, 2.0}), ConfigError);           // n < 3
    CHECK_THROWS_AS(shapiro_wilk({3.0, 3.0, 3.0, 3.0}), DegenerateError);  // zero range
}

TEST_CASE("shapiro-wilk W near 1 for perfect normal quantile data") {
    std::vector<double> x;
    const int n = 50;
    for (int i = 1; i <= n; ++i)
        x.push_back(normal_inverse_cdf((i - 0.375) / (n + 0.25)));
    const TestResult r = shapiro_wilk(x);
    CHECK(r.statistic > 0.998);
    CHECK(r.p > 0.5);
}

TEST_CASE("group_compare on Table 2 summary rows") {
    std::vector<RegionSummaryRow> rows = {
        {"RUL", {79, 3815.58, 1389.97}, {27, 4683.04, 1657.47}},
        {"RML", {79, 2574.49, 1121.00}, {27, 3047.37, 1016.74}},
        {"RLL", {79, 6502.94, 3040.40}, {27, 7678.07, 3167.45}},
        {"LUL", {79, 4725.57, 1724.13}, {27, 5577.67, 2107.39}},
        {"LLL", {79, 6281.54, 2749.52}, {27, 7021.04, 3238.72}},
    };
    const auto out = group_compare(rows);
    const double printed[] = {0.009, 0.056, 0.089, 0.039, 0.252};
    const bool significant[] = {true, false, false, true, false};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(std::abs(out[i].p - printed[i]) < 0.0015);
        CHECK(out[i].significant == significant[i]);
        CHECK(out[i].df == 104.0);
    }
}

TEST_CASE("group_compare p formatting and symmetry under group relabeling") {
    // Table 3 R3 row prints < 0.001; computed p ~ 1.7e-4
    std::vector<RegionSummaryRow> rows = {
        {"R3", {79, 1408.34, 540.71}, {27, 1940.93, 783.54}},
    };
    const auto out = group_compare(rows);
    CHECK(out[0].p < 0.001);
    CHECK(std::abs(out[0].p - 1.7e-4) < 5e-5);
    CHECK(out[0].p_formatted == "<0.001");

    std::vector<RegionSummaryRow> flipped = {
        {"R3", rows[0].group1, rows[0].group0},
    };
    const auto out2 = group_compare(flipped);
    CHECK(out2[0].t == doctest::Approx(-out[0].t).epsilon(1e-12));
    CHECK(out2[0].p == doctest::Approx(out[0].p).epsilon(1e-12));
}

TEST_CASE("group_compare over a cohort with identical groups") {
    std::vector<SubjectRecord> records;
    for (int g = 0; g < 2; ++g)
        for (int i = 0; i < 10; ++i) {
            SubjectRecord r;
            r.id = std::to_string(g) + "_" + std::to_string(i);
            r.group = g ? "B" : "A";
            for (RegionCode c : segment_codes())
                r.volumes_mm3[c] = 100.0 + 10.0 * i;  // identical distributions
            for (RegionCode c : lobe_codes()) r.volumes_mm3[c] = 500.0 + 10.0 * i;
            records.push_back(r);
        }
    const CohortTable cohort = build_cohort(records);
    const auto rows = group_compare(cohort, {RegionCode::R1, RegionCode::RUL});
    for (const auto& row : rows) {
        CHECK(row.p == doctest::Approx(1.0));
        CHECK_FALSE(row.significant);
        CHECK(row.t == doctest::Approx(0.0));
    }
}

TEST_CASE("group_compare normalized path skips subjects without BSA inputs") {
    std::vector<SubjectRecord> records;
    for (int g = 0; g < 2; ++g)
        for (int i = 0; i < 5; ++i) {
            SubjectRecord r;
            r.id = std::to_string(g) + "_" + std::to_string(i);
            r.group = g ? "B" : "A";
            r.volumes_mm3[RegionCode::R1] = 100.0 + i + 50.0 * g;
            if (i != 0) {  // subject 0 lacks height/weight
                r.height_cm = 160.0 + i;
                r.weight_kg = 55.0 + i;
            }
            records.push_back(r);
        }
    const CohortTable cohort = build_cohort(records);
    const auto rows = group_compare(cohort, {RegionCode::R1}, true);
    CHECK(rows[0].group0.n == 4);  // one subject excluded per group
    CHECK(rows[0].group1.n == 4);
}

TEST_CASE("format_p_value") {
    CHECK(format_p_value(0.25) == "0.250");
    CHECK(format_p_value(0.0009) == "<0.001");
    CHECK(format_p_value(0.001) == "0.001");
    CHECK(format_p_value(1.0) == "1.000");
}
