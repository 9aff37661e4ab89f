#pragma once

#include <functional>
#include <vector>

namespace restore::stats {

double norm_cdf(double z);
// Inverse standard normal CDF; p in (0, 1).
double norm_ppf(double p);

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Survival function of the chi-square distribution with dof degrees of freedom.
double chi2_sf(double x, double dof);

// Kolmogorov distribution survival function Q(lambda) = 2 sum (-1)^{k-1} e^{-2k^2 lambda^2}.
double kolmogorov_sf(double lambda);

// One-sample Kolmogorov-Smirnov statistic sup_x |F_n(x) - F(x)|.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
// Asymptotic p-value with the Stephens small-sample correction.
double ks_pvalue(double d, std::size_t n);
double ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

struct TwoSampleKs {
    double d;
    double pvalue;
};
TwoSampleKs ks_two_sample(std::vector<double> a, std::vector<double> b);

// Pearson chi-square against expected counts. Cells with expected count below
// merge_threshold are pooled into their left neighbour before the statistic
// is formed; the dof follows the pooled cell count.
struct Chi2Result {
    double statistic;
    double dof;
    double pvalue;
};
Chi2Result chi2_test(const std::vector<double>& observed, const std::vector<double>& expected,
                     double merge_threshold = 5.0);

}  // namespace restore::stats
