#pragma once

#include <optional>
#include <string>
#include <vector>

#include "airquant/errors.hpp"

namespace airquant {

struct SummaryStat {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
};

struct TestResult {
    double statistic = 0.0;
    double df = 0.0;
    double p = 1.0;
    std::string method;      // pooled-t, welch-t, fisher-exact-1s, fisher-exact-2s, shapiro-wilk
    bool degenerate = false; // zero-variance inputs and similar
};

enum class TVariant { Pooled, Welch };

// ---- special functions -------------------------------------------------

double ln_gamma(double x);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double x, double a, double b);

// Inverse standard normal CDF (Wichura's PPND16).
double normal_inverse_cdf(double q);

double normal_cdf(double z);

// Two-sided tail of Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// ---- tests ---------------------------------------------------------------

// Two-sample t-test from (n, mean, sd) summaries; pooled variance,
// df = n1 + n2 - 2; statistic sign follows (mean_b - mean_a).
TestResult t_test_summary(const SummaryStat& a, const SummaryStat& b);

TestResult t_test_raw(const std::vector<double>& a, const std::vector<double>& b,
                      TVariant variant = TVariant::Pooled);

SummaryStat summarize(const std::vector<double>& sample);

struct FisherResult {
    TestResult one_sided;  // P(X <= a), lower tail on cell a
    TestResult two_sided;  // minimum-likelihood convention
};

// 2x2 table [[a, b], [c, d]], hypergeometric with fixed margins.
FisherResult fisher_exact_2x2(long long a, long long b, long long c, long long d);

// Shapiro-Wilk W and p for 3 <= n <= 5000 (Royston's AS R94 approximation).
TestResult shapiro_wilk(const std::vector<double>& samples);

// ---- group comparison driver ----------------------------------------------

struct RegionSummaryRow {
    std::string region;
    SummaryStat group0;
    SummaryStat group1;
};

struct CompareRow {
    std::string region;
    SummaryStat group0;
    SummaryStat group1;
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
    std::string p_formatted;  // 3 decimals, "<0.001" below threshold
    bool significant = false; // p < 0.05, two-tailed
};

std::string format_p_value(double p);

std::vector<CompareRow> group_compare(const std::vector<RegionSummaryRow>& rows,
                                      TVariant variant = TVariant::Pooled);

}  // namespace airquant

#include "airquant/quant.hpp"

namespace airquant {

// Per-region comparison of a two-group cohort. With normalized=true, volumes
// are divided by each subject's BSA; subjects lacking height or weight are
// excluded from the normalized analysis only.
std::vector<CompareRow> group_compare(const CohortTable& cohort,
                                      const std::vector<RegionCode>& regions,
                                      bool normalized = false,
                                      TVariant variant = TVariant::Pooled);

}  // namespace airquant
