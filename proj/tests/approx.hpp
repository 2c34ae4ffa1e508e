#pragma once

#include <doctest.h>

// doctest's Approx adds an absolute floor of 1 to the tolerance, which makes
// checks on small values vacuous. This one is relative, except against 0.
inline doctest::Approx approx(double v) { return doctest::Approx(v).scale(v == 0.0 ? 1.0 : 0.0); }
