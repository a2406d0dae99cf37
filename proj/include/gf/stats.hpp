#pragma once

namespace gf::stats {

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

// P(T <= t) for Student's t with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);

// Inverse CDF, solved by bisection on t to 1e-10. p in (0, 1), dof >= 1.
double student_t_quantile(double p, double dof);

}  // namespace gf::stats
