#pragma once

namespace stemdiff {

// Exponential integral of order one, E1(x) = integral_x^inf exp(-u)/u du.
// Power series below x = 1, modified Lentz continued fraction above.
// x = 0 returns +infinity; results that underflow return 0.
// Throws std::domain_error for negative or non-finite x.
double e1(double x);

// E1(a) - E1(b) without catastrophic cancellation.
// Small arguments use ln(b/a) + sum_n (-1)^(n+1) (a^n - b^n)/(n n!);
// nearby arguments integrate exp(-u)/u over [a, b] directly.
// e1_diff(0, 0) is defined as 0.
double e1_diff(double a, double b);

}  // namespace stemdiff
