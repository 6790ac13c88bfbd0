#pragma once

// Internal special-function hooks shared between translation units.

namespace kplane::detail {

// 2F1 with the complement 1-z supplied by the caller; avoids cancellation
// when z = 1/r^2 with r just above 1.
double hyp2f1_with_complement(double a, double b, double c, double z, double one_minus_z);

}  // namespace kplane::detail
