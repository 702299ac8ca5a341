#include "airquant/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace airquant {

double ln_gamma(double x) {
    if (x <= 0.0) throw ConfigError("ln_gamma: x must be positive");
    return std::lgamma(x);
}

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double beta_cf(double x, double a, double b) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
    if (a <= 0.0 || b <= 0.0)
        throw ConfigError("regularized_incomplete_beta: a, b must be positive");
    if (x < 0.0 || x > 1.0)
        throw ConfigError("regularized_incomplete_beta: x must be in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    const double ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_cf(x, a, b) / a;
    return 1.0 - front * beta_cf(1.0 - x, b, a) / b;
}

double normal_inverse_cdf(double q) {
    if (q <= 0.0 || q >= 1.0)
        throw ConfigError("normal_inverse_cdf: q must be in (0, 1)");

    // Wichura (1988), algorithm AS 241, PPND16.
    const double p = q - 0.5;
    if (std::fabs(p) <= 0.425) {
        const double r = 0.180625 - p * p;
        return p *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = p < 0.0 ? q : 1.0 - q;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        value =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
    }
    return p < 0.0 ? -value : value;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double student_t_two_sided_p(double t, double df) {
    if (df <= 0) throw ConfigError("student_t_two_sided_p: df must be positive");
    const double x = df / (df + t * t);
    return regularized_incomplete_beta(x, df / 2.0, 0.5);
}

SummaryStat summarize(const std::vector<double>& sample) {
    SummaryStat s;
    s.n = sample.size();
    if (s.n == 0) return s;
    double sum = 0.0;
    for (double v : sample) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n >= 2) {
        double ss = 0.0;
        for (double v : sample) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

TestResult t_test_summary(const SummaryStat& a, const SummaryStat& b) {
    if (a.n < 2 || b.n < 2)
        throw DegenerateError("t_test_summary: each group needs n >= 2");
    if (a.sd < 0 || b.sd < 0) throw ConfigError("t_test_summary: negative sd");

    TestResult r;
    r.method = "pooled-t";
    r.df = static_cast<double>(a.n + b.n - 2);
    if (a.sd == 0.0 && b.sd == 0.0) {
        r.degenerate = true;
        if (a.mean == b.mean) {
            r.statistic = 0.0;
            r.p = 1.0;
        } else {
            r.statistic = b.mean > a.mean ? std::numeric_limits<double>::infinity()
                                          : -std::numeric_limits<double>::infinity();
            r.p = 0.0;
        }
        return r;
    }
    const double na = static_cast<double>(a.n), nb = static_cast<double>(b.n);
    const double sp2 =
        ((na - 1.0) * a.sd * a.sd + (nb - 1.0) * b.sd * b.sd) / (na + nb - 2.0);
    r.statistic = (b.mean - a.mean) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
    r.p = student_t_two_sided_p(r.statistic, r.df);
    return r;
}

TestResult t_test_raw(const std::vector<double>& a, const std::vector<double>& b,
                      TVariant variant) {
    if (a.size() < 2 || b.size() < 2)
        throw DegenerateError("t_test_raw: each sample needs n >= 2");
    const SummaryStat sa = summarize(a);
    const SummaryStat sb = summarize(b);
    if (variant == TVariant::Pooled) return t_test_summary(sa, sb);

    TestResult r;
    r.method = "welch-t";
    if (sa.sd == 0.0 && sb.sd == 0.0) {
        r.degenerate = true;
        r.df = static_cast<double>(sa.n + sb.n - 2);
        r.statistic = 0.0;
        r.p = sa.mean == sb.mean ? 1.0 : 0.0;
        return r;
    }
    const double va = sa.sd * sa.sd / static_cast<double>(sa.n);
    const double vb = sb.sd * sb.sd / static_cast<double>(sb.n);
    r.statistic = (sb.mean - sa.mean) / std::sqrt(va + vb);
    r.df = (va + vb) * (va + vb) /
           (va * va / static_cast<double>(sa.n - 1) +
            vb * vb / static_cast<double>(sb.n - 1));
    r.p = student_t_two_sided_p(r.statistic, r.df);
    return r;
}

FisherResult fisher_exact_2x2(long long a, long long b, long long c, long long d) {
    if (a < 0 || b < 0 || c < 0 || d < 0)
        throw ConfigError("fisher_exact_2x2: counts must be non-negative");
    const long long n = a + b + c + d;
    if (n == 0) throw DegenerateError("fisher_exact_2x2: all-zero table");

    const long long r0 = a + b;  // row margins
    const long long r1 = c + d;
    const long long c0 = a + c;  // column margin of cell a

    auto ln_choose = [](long long nn, long long kk) {
        return ln_gamma(static_cast<double>(nn) + 1.0) -
               ln_gamma(static_cast<double>(kk) + 1.0) -
               ln_gamma(static_cast<double>(nn - kk) + 1.0);
    };
    // P(X = k): k successes in row 0 with fixed margins.
    const double ln_denominator = ln_choose(n, c0);
    auto pmf = [&](long long k) {
        return std::exp(ln_choose(r0, k) + ln_choose(r1, c0 - k) - ln_denominator);
    };

    const long long k_lo = std::max(0LL, c0 - r1);
    const long long k_hi = std::min(c0, r0);
    const double p_obs = pmf(a);

    double lower = 0.0, two = 0.0;
    for (long long k = k_lo; k <= k_hi; ++k) {
        const double pk = pmf(k);
        if (k <= a) lower += pk;
        if (pk <= p_obs * (1.0 + 1e-7)) two += pk;
    }
    FisherResult res;
    res.one_sided.statistic = static_cast<double>(a);
    res.one_sided.df = 0.0;
    res.one_sided.p = std::min(1.0, lower);
    res.one_sided.method = "fisher-exact-1s";
    res.two_sided.statistic = static_cast<double>(a);
    res.two_sided.df = 0.0;
    res.two_sided.p = std::min(1.0, two);
    res.two_sided.method = "fisher-exact-2s";
    return res;
}

namespace {

double poly_eval(const double* c, int n, double x) {
    double p = c[0];
    double xn = 1.0;
    for (int i = 1; i < n; ++i) {
        xn *= x;
        p += c[i] * xn;
    }
    return p;
}

}  // namespace

TestResult shapiro_wilk(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n < 3 || n > 5000)
        throw ConfigError("shapiro_wilk: n must be in [3, 5000]");

    std::vector<double> x(samples);
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (range < 1e-19)
        throw DegenerateError("shapiro_wilk: effectively zero sample range");

    // AS R94 (Royston 1995), uncensored path.
    static const double c1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
    static const double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static const double c3[4] = {0.5440, -0.39978, 0.025054, -6.714e-4};
    static const double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static const double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static const double c6[3] = {-0.4803, -0.082676, 0.0030302};
    static const double g[2] = {-2.273, 0.459};
    constexpr double sqrth = 0.70710678118654752440;
    constexpr double pi6 = 1.90985931710274403;   // 6/pi
    constexpr double stqr = 1.04719755119659775;  // asin(sqrt(3/4))

    const double an = static_cast<double>(n);
    const std::size_t n2 = n / 2;
    std::vector<double> a(n2);

    if (n == 3) {
        a[0] = sqrth;
    } else {
        const double an25 = an + 0.25;
        double summ2 = 0.0;
        for (std::size_t i = 0; i < n2; ++i) {
            a[i] = normal_inverse_cdf((static_cast<double>(i + 1) - 0.375) / an25);
            summ2 += a[i] * a[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly_eval(c1, 6, rsn) - a[0] / ssumm2;
        std::size_t i1;
        double fac;
        if (n > 5) {
            i1 = 2;
            const double a2 = -a[1] / ssumm2 + poly_eval(c2, 6, rsn);
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1]) /
                            (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[0] = a1;
            a[1] = a2;
        } else {
            i1 = 1;
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0]) / (1.0 - 2.0 * a1 * a1));
            a[0] = a1;
        }
        for (std::size_t i = i1; i < n2; ++i) a[i] = -a[i] / fac;
    }

    // W as the squared correlation between data and coefficients. The
    // coefficient vector is antisymmetric: coef(i) = -a(n-1-i) for the lower
    // half, +a(...) mirrored for the upper half, 0 at an odd middle.
    auto coef = [&](std::size_t i) -> double {
        if (i < n2) return -a[i];
        if (n % 2 == 1 && i == n2) return 0.0;
        return a[n - 1 - i];
    };
    const double xbar = [&] {
        double s = 0.0;
        for (double v : x) s += v / range;
        return s / an;
    }();
    double ssx = 0.0, sax = 0.0, ssa = 0.0;
    double abar = 0.0;
    for (std::size_t i = 0; i < n; ++i) abar += coef(i);
    abar /= an;
    for (std::size_t i = 0; i < n; ++i) {
        const double xs = x[i] / range - xbar;
        const double as = coef(i) - abar;
        ssx += xs * xs;
        ssa += as * as;
        sax += as * xs;
    }
    const double ssassx = std::sqrt(ssa * ssx);
    const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    const double w = 1.0 - w1;

    TestResult r;
    r.method = "shapiro-wilk";
    r.statistic = w;
    r.df = static_cast<double>(n);
    if (n == 3) {
        r.p = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
        return r;
    }
    const double y = std::log(w1);
    const double xx = std::log(an);
    double m, s;
    if (n <= 11) {
        const double gamma = poly_eval(g, 2, an);
        if (y >= gamma) {
            r.p = 1e-99;
            return r;
        }
        const double yy = -std::log(gamma - y);
        m = poly_eval(c3, 4, an);
        s = std::exp(poly_eval(c4, 4, an));
        r.p = 1.0 - normal_cdf((yy - m) / s);
        return r;
    }
    m = poly_eval(c5, 4, xx);
    s = std::exp(poly_eval(c6, 3, xx));
    r.p = 1.0 - normal_cdf((y - m) / s);
    return r;
}

std::string format_p_value(double p) {
    if (p < 0.001) return "<0.001";
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.3f", p);
    return buf;
}

std::vector<CompareRow> group_compare(const CohortTable& cohort,
                                      const std::vector<RegionCode>& regions,
                                      bool normalized, TVariant variant) {
    if (cohort.groups.size() != 2)
        throw DegenerateError("group_compare: cohort must have exactly two groups");
    const std::string& g0 = cohort.groups[0];

    std::vector<RegionSummaryRow> rows;
    rows.reserve(regions.size());
    for (RegionCode code : regions) {
        std::vector<double> v0, v1;
        for (const auto& s : cohort.subjects) {
            auto it = s.volumes_mm3.find(code);
            if (it == s.volumes_mm3.end())
                throw ConfigError("group_compare: region " + region_name(code) +
                                  " absent from cohort subject \"" + s.id + "\"");
            double v = it->second;
            if (normalized) {
                const auto bsa = s.bsa_m2();
                if (!bsa) continue;  // excluded from normalized analysis only
                v = normalize_by_bsa(v, *bsa);
            }
            (s.group == g0 ? v0 : v1).push_back(v);
        }
        RegionSummaryRow row;
        row.region = region_name(code);
        row.group0 = summarize(v0);
        row.group1 = summarize(v1);
        rows.push_back(row);
    }
    return group_compare(rows, variant);
}

std::vector<CompareRow> group_compare(const std::vector<RegionSummaryRow>& rows,
                                      TVariant variant) {
    std::vector<CompareRow> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        TestResult t;
        if (variant == TVariant::Pooled) {
            t = t_test_summary(row.group0, row.group1);
        } else {
            // Welch from summaries
            const double va = row.group0.sd * row.group0.sd / row.group0.n;
            const double vb = row.group1.sd * row.group1.sd / row.group1.n;
            t.method = "welch-t";
            if (va + vb == 0.0) {
                t.degenerate = true;
                t.statistic = 0.0;
                t.df = static_cast<double>(row.group0.n + row.group1.n - 2);
                t.p = row.group0.mean == row.group1.mean ? 1.0 : 0.0;
            } else {
                t.statistic = (row.group1.mean - row.group0.mean) / std::sqrt(va + vb);
                t.df = (va + vb) * (va + vb) /
                       (va * va / (row.group0.n - 1) + vb * vb / (row.group1.n - 1));
                t.p = student_t_two_sided_p(t.statistic, t.df);
            }
        }
        CompareRow cr;
        cr.region = row.region;
        cr.group0 = row.group0;
        cr.group1 = row.group1;
        cr.t = t.statistic;
        cr.df = t.df;
        cr.p = t.p;
        cr.p_formatted = format_p_value(t.p);
        cr.significant = t.p < 0.05;
        out.push_back(cr);
    }
    return out;
}

}  // namespace airquant
