#include "locagen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

namespace locagen::stats {

namespace {

// Lanczos approximation, g = 7
double log_gamma(double x) {
    static const double coeff[9] = {0.99999999999980993,  676.5203681218851,
                                    -1259.1392167224028,  771.32342877765313,
                                    -176.61502916214059,  12.507343278686905,
                                    -0.13857109526572012, 9.9843695780195716e-6,
                                    1.5056327351493116e-7};
    if (x < 0.5) {
        // reflection formula
        return std::log(3.14159265358979323846 / std::sin(3.14159265358979323846 * x)) -
               log_gamma(1.0 - x);
    }
    x -= 1.0;
    double a = coeff[0];
    const double t = x + 7.5;
    for (int i = 1; i < 9; ++i) a += coeff[i] / (x + i);
    return 0.5 * std::log(2.0 * 3.14159265358979323846) + (x + 0.5) * std::log(t) - t +
           std::log(a);
}

// modified Lentz continued fraction for the incomplete beta
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 500;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
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
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("incomplete_beta: continued fraction failed to converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("incomplete_beta: a, b must be > 0");
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("incomplete_beta: x outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    const double log_front = log_gamma(a + b) - log_gamma(a) - log_gamma(b) +
                             a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_distribution_sf(double f, double df1, double df2) {
    if (!(df1 > 0.0) || !(df2 > 0.0))
        throw std::invalid_argument("f_distribution_sf: degrees of freedom must be > 0");
    if (f <= 0.0) return 1.0;
    return incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f));
}

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw std::invalid_argument("one_way_anova: need at least 2 groups");
    for (const auto& g : groups)
        if (g.size() < 2)
            throw std::invalid_argument("one_way_anova: every group needs at least 2 values");

    AnovaResult res;
    const int k = static_cast<int>(groups.size());
    std::size_t n_total = 0;
    double grand_sum = 0.0;
    for (const auto& g : groups) {
        double s = 0.0;
        for (double v : g) s += v;
        res.group_means.push_back(s / static_cast<double>(g.size()));
        grand_sum += s;
        n_total += g.size();
    }
    res.grand_mean = grand_sum / static_cast<double>(n_total);

    double ssb = 0.0, ssw = 0.0;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const double mean = res.group_means[gi];
        const double dm = mean - res.grand_mean;
        ssb += static_cast<double>(groups[gi].size()) * dm * dm;
        for (double v : groups[gi]) ssw += (v - mean) * (v - mean);
    }

    res.df_between = k - 1;
    res.df_within = static_cast<int>(n_total) - k;

    if (ssw == 0.0) {
        if (ssb == 0.0) {
            res.f_statistic = 0.0;
            res.p_value = 1.0;
        } else {
            res.f_statistic = std::numeric_limits<double>::infinity();
            res.p_value = 0.0;
            res.degenerate = true;
        }
        return res;
    }

    res.f_statistic = (ssb / res.df_between) / (ssw / res.df_within);
    res.p_value = f_distribution_sf(res.f_statistic, res.df_between, res.df_within);
    return res;
}

AnovaResult anova_by_factor(const std::vector<double>& factor,
                            const std::vector<double>& response) {
    if (factor.size() != response.size() || factor.empty())
        throw std::invalid_argument("anova_by_factor: length mismatch or empty input");
    std::map<double, std::vector<double>> by_level;
    for (std::size_t i = 0; i < factor.size(); ++i) by_level[factor[i]].push_back(response[i]);
    std::vector<std::vector<double>> groups;
    groups.reserve(by_level.size());
    for (auto& [level, values] : by_level) {
        // canonical in-group order makes the result bit-identical under any
        // permutation of the input rows
        std::sort(values.begin(), values.end());
        groups.push_back(std::move(values));
    }
    return one_way_anova(groups);
}

std::pair<AnovaResult, AnovaResult> offset_anova(const sim::OffsetTable& table) {
    return {anova_by_factor(table.offset2_level, table.position_error_m),
            anova_by_factor(table.offset3_level, table.position_error_m)};
}

std::string AnovaResult::to_key_value() const {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "f_statistic %.17g\ndf_between %d\ndf_within %d\np_value %.17g\n"
                  "grand_mean %.17g\ndegenerate %d\n",
                  f_statistic, df_between, df_within, p_value, grand_mean, degenerate ? 1 : 0);
    return buf;
}

DistributionTable histogram(const std::vector<double>& values, double bin_width) {
    if (values.empty()) throw std::invalid_argument("histogram: empty input");
    if (!(bin_width > 0.0)) throw std::invalid_argument("histogram: bin width must be > 0");

    const double lo = *std::min_element(values.begin(), values.end());
    const double start = std::floor(lo / bin_width) * bin_width;

    DistributionTable t;
    t.kind = DistributionTable::Kind::histogram;
    t.bin_width = bin_width;
    t.total = values.size();

    std::map<long long, std::size_t> counts;
    for (double v : values) {
        long long bin = static_cast<long long>(std::floor((v - start) / bin_width));
        if (bin < 0) bin = 0;  // guard rounding at the lower edge
        ++counts[bin];
    }
    const long long last = counts.rbegin()->first;
    for (long long b = 0; b <= last; ++b) {
        t.x.push_back(start + static_cast<double>(b) * bin_width);
        const auto it = counts.find(b);
        t.y.push_back(it == counts.end() ? 0.0 : static_cast<double>(it->second));
    }
    return t;
}

DistributionTable cdf(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("cdf: empty input");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());

    DistributionTable t;
    t.kind = DistributionTable::Kind::cdf;
    t.total = values.size();
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
        t.x.push_back(sorted[i]);
        t.y.push_back(static_cast<double>(i + 1) / n);
    }
    return t;
}

std::string DistributionTable::to_csv() const {
    std::string out = kind == Kind::histogram ? "bin_left_edge,count\n" : "value,cum_fraction\n";
    char line[80];
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g,%.17g\n", x[i], y[i]);
        out += line;
    }
    return out;
}

}  // namespace locagen::stats
