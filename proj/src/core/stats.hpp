#pragma once

#include <cstdint>

namespace authdrift::stats {

// I_x(a, b), continued-fraction evaluation (modified Lentz).
double RegularizedIncompleteBeta(double a, double b, double x);

// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double StudentTTwoTailed(double t, double dof);

// P(X >= x) for chi-square with one degree of freedom.
double ChiSquare1Survival(double x);

// Two-tailed exact binomial test of k successes in n trials at p = 1/2:
// min(1, 2 * P(X <= min(k, n - k))).
double BinomialTwoTailedHalf(std::uint64_t k, std::uint64_t n);

}  // namespace authdrift::stats
