#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "hypvar/error.hpp"

#define EXPECT_ERROR_KIND(stmt, expected_kind)                                            \
    do {                                                                                  \
        try {                                                                             \
            stmt;                                                                         \
            ADD_FAILURE() << "expected " << ::hypvar::to_string(expected_kind);           \
        } catch (const ::hypvar::Error& e) {                                              \
            EXPECT_EQ(e.kind(), expected_kind) << e.what();                               \
        }                                                                                 \
    } while (0)

namespace oracle {

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), std::numeric_limits<double>::min());
}

// Adaptive quadrature, independent of the library's grids.
inline double half_line(const std::function<double(double)>& f) {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate(f, 1e-13);
}

inline double interval(const std::function<double(double)>& f, double a, double b) {
    boost::math::quadrature::tanh_sinh<double> q;
    return q.integrate(f, a, b, 1e-13);
}

inline double hyperbolic_density(double r) {
    const double s = std::sinh(r);
    return 4.0 * 3.14159265358979323846 * s * s;
}

} // namespace oracle
