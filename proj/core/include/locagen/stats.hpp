#pragma once

#include <string>
#include <utility>
#include <vector>

#include "locagen/simulate.hpp"

namespace locagen::stats {

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation, ~1e-12 target accuracy.
double incomplete_beta(double a, double b, double x);

// Survival function of the F distribution: P(F' > f | d1, d2).
double f_distribution_sf(double f, double df1, double df2);

struct AnovaResult {
    double f_statistic = 0.0;
    int df_between = 0;
    int df_within = 0;
    double p_value = 1.0;
    std::vector<double> group_means;
    double grand_mean = 0.0;
    bool degenerate = false;  // zero within-group variance with unequal means

    std::string to_key_value() const;
};

// One-way ANOVA over k groups. Zero within-group variance yields F = 0,
// p = 1 when the group means agree, and p = 0 with the degenerate flag when
// they do not.
AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups);

// One-way ANOVA of `response` grouped by distinct values of `factor`.
AnovaResult anova_by_factor(const std::vector<double>& factor,
                            const std::vector<double>& response);

// The two independent per-offset ANOVAs of the sampling-offset experiment.
std::pair<AnovaResult, AnovaResult> offset_anova(const sim::OffsetTable& table);

// Histogram / empirical CDF tables for error reporting; both emit CSV.
struct DistributionTable {
    enum class Kind { histogram, cdf };
    Kind kind = Kind::histogram;
    std::vector<double> x;  // histogram: left bin edges; cdf: sorted distinct values
    std::vector<double> y;  // histogram: counts; cdf: cumulative fractions
    double bin_width = 0.0;
    std::size_t total = 0;

    std::string to_csv() const;
};

DistributionTable histogram(const std::vector<double>& values, double bin_width);
DistributionTable cdf(const std::vector<double>& values);

}  // namespace locagen::stats
