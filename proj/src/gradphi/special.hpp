#pragma once

namespace gradphi {

double normal_pdf(double z);
double normal_cdf(double z);
// Inverse of normal_cdf on (0,1); accurate to a few ulps across the range.
double normal_quantile(double p);

// Asymptotic Kolmogorov survival function P(sqrt(n) D > lambda).
double kolmogorov_survival(double lambda);

// Upper tail of a chi-square variable with `dof` degrees of freedom.
double chi_square_survival(double stat, double dof);

}  // namespace gradphi
