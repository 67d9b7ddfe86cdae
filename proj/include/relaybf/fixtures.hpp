#pragma once

// Reference networks and their published objective values. Matrices are the
// printed (2-3 digit) values, so comparisons against published numbers use a
// relative tolerance rather than exact equality.

#include <string>
#include <vector>

#include "relaybf/channel.hpp"

namespace relaybf::fixtures {

namespace detail {
inline CVector cvec(std::initializer_list<Complex> v) {
  CVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const auto &z : v) out(i++) = z;
  return out;
}
inline RVector rvec(std::initializer_list<double> v) {
  RVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}
inline HermitianMatrix hmat(std::initializer_list<std::initializer_list<Complex>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  CMatrix m(n, n);
  Eigen::Index i = 0;
  for (const auto &r : rows) {
    Eigen::Index j = 0;
    for (const auto &z : r) m(i, j++) = z;
    ++i;
  }
  return HermitianMatrix(m);
}
} // namespace detail

/// sigma^2 and P0 assumed for the "SNR = 10 dB" total-power figures.
inline constexpr double kTotalSigma2 = 1.0;
inline constexpr double kTotalP0 = 10.0;

inline RicianParams total_power_1() {
  using detail::cvec, detail::rvec;
  return RicianParams{
      cvec({{0.2202, 0.8130}, {-0.4075, -0.7644}, {-2.0107, 0.4016}, {-0.4503, 0.0678}, {0.8588, -0.1130},
            {-0.1219, 0.4260}}),
      rvec({3.8042, 2.6326, 4.7590, 0.4989, 1.2576, 1.2484}),
      cvec({{-0.3726, 0.8007}, {0.4592, -0.2045}, {-0.8769, 0.4671}, {-0.9270, 0.5430}, {-0.0063, -0.4977},
            {-0.7783, -0.7712}}),
      rvec({0.3913, 0.4791, 0.0865, 2.7813, 4.8960, 4.6789})};
}

inline RicianParams total_power_2() {
  using detail::cvec, detail::rvec;
  return RicianParams{
      cvec({{-0.4751, 0.7340}, {-0.0449, -0.4609}, {0.0239, -1.5154}, {0.5130, -0.1755}, {-0.2017, 0.6717},
            {1.0134, -0.1985}}),
      rvec({2.4707, 3.9193, 2.4121, 3.8879, 1.2050, 3.0901}),
      cvec({{0.5360, -1.2932}, {1.7471, -0.8914}, {0.0955, -0.1577}, {-0.6795, 0.2479}, {0.5815, 0.5039},
            {-0.3090, 0.8413}}),
      rvec({3.9655, 0.2693, 0.9205, 0.5567, 3.3901, 2.9367})};
}

struct TotalPowerExpectation {
  double x_lower, x_upper;
  double x_from_lower, lambda_from_lower;
  double x_from_upper, lambda_from_upper;
};

inline constexpr TotalPowerExpectation kTotal1{0.1711, 0.7077, 0.2156, 1.2191, 0.5844, 1.2694};
inline constexpr TotalPowerExpectation kTotal2{0.2754, 0.6392, 0.4087, 0.6060, 0.4087, 0.6060};

inline HermitianMatrix indiv_n4_Q() {
  return detail::hmat({{2.1, {.73, .75}, {.43, 1.1}, {.70, -.33}},
                       {{.73, -.75}, 1.6, {-.20, .18}, {.57, -.71}},
                       {{.43, -1.1}, {-.20, -.18}, 2.0, {-.52, -.45}},
                       {{.70, .33}, {.57, .71}, {-.52, .45}, .98}});
}

inline HermitianMatrix indiv_n4_R() {
  return detail::hmat({{1.6, {-.74, -.16}, {.084, -.57}, {-.19, .67}},
                       {{-.74, .16}, 1.1, {-.88, .31}, {-.44, -.24}},
                       {{.084, .57}, {-.88, -.31}, 2.0, {.20, -.14}},
                       {{-.19, -.67}, {-.44, .24}, {.20, .14}, 1.5}});
}

inline HermitianMatrix indiv_n6_Q() {
  return detail::hmat(
      {{.778, {-.658, -.646}, {.135, .269}, {-.273, .005}, {.088, -.261}, {-.021, -.013}},
       {{-.658, .646}, 2.20, {-.379, -1.14}, {.253, -.872}, {-.337, 1.02}, {.444, -.035}},
       {{.135, -.269}, {-.379, 1.14}, 2.0, {.689, .298}, {-.547, -.160}, {.373, .693}},
       {{-.273, -.005}, {.253, .872}, {.689, -.298}, 1.0, {-.655, .192}, {.132, -.107}},
       {{.088, .261}, {-.337, -1.02}, {-.547, .160}, {-.655, -.192}, 2.40, {-.721, -.276}},
       {{-.021, .013}, {.444, .035}, {.373, -.693}, {.132, .107}, {-.721, .276}, 1.09}});
}

inline HermitianMatrix indiv_n6_R() {
  return detail::hmat(
      {{3.44, {-.263, .054}, {.572, 1.73}, {.490, -.276}, {-.613, -1.62}, {-.014, .375}},
       {{-.263, -.054}, 3.09, {-.342, -1.49}, {.926, 1.13}, {-.282, -.713}, {-.211, .911}},
       {{.572, -1.73}, {-.342, 1.49}, 2.70, {-.493, .865}, {-.396, .826}, {.149, -.836}},
       {{.490, .276}, {.926, -1.13}, {-.493, -.865}, 3.09, {.541, .330}, {-.552, -.221}},
       {{-.613, 1.62}, {-.282, .713}, {-.396, -.826}, {.541, -.330}, 2.75, {-.442, -.352}},
       {{-.014, -.375}, {-.211, -.911}, {.149, .836}, {-.552, .221}, {-.442, .352}, 2.08}});
}

/// Channel statistics realizing D1 = I: Ps = sigma^2 = 1, D = I, P_k = 2,
/// so (Ps D_kk + sigma^2) / P_k = 1 and A_k = J_k + Q. With these numbers
/// the destination SNR equals the homogeneous QCQP objective.
inline ChannelStats unit_scaling_stats(const HermitianMatrix &r, const HermitianMatrix &q) {
  return ChannelStats{RVector::Ones(r.size()), r, q, 1.0};
}
inline constexpr double kIndivPs = 1.0;
inline constexpr double kIndivCap = 2.0;

struct IndivExpectation {
  double sdp;
  double eig_small, eig_large;
  double grp;
  double cdm;
  double pnorm;
};

inline constexpr IndivExpectation kIndivN4{3.74112, 0.2064, 1.8148, 3.6970, 3.7076, 3.7069};
inline constexpr IndivExpectation kIndivN6{9.33816, 0.8369, 2.3774, 8.1472, 8.9428, 8.9409};

} // namespace relaybf::fixtures
