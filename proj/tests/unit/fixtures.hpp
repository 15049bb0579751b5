#pragma once

#include "mvre/core.hpp"

#include <initializer_list>
#include <string>
#include <vector>

namespace fixtures {

inline mvre::Matrix mat2(double a, double b, double c, double d) {
  mvre::Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline mvre::Vector vec_of(std::initializer_list<double> v) {
  mvre::Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline mvre::Dataset hypertension() {
  const double rows[10][5] = {
      {-6.66, -2.99, 0.72, 0.78, 0.27},  {-14.17, -7.87, 4.73, 0.45, 1.44}, {-12.88, -6.01, 10.31, 0.59, 1.77},
      {-8.71, -5.11, 0.30, 0.77, 0.10},  {-8.70, -4.64, 0.14, 0.66, 0.05},  {-10.60, -5.56, 0.58, 0.49, 0.18},
      {-11.36, -3.98, 0.30, 0.50, 0.27}, {-17.93, -6.54, 5.82, 0.61, 1.31}, {-6.55, -2.08, 0.41, 0.45, 0.11},
      {-10.26, -3.49, 0.20, 0.51, 0.04},
  };
  std::vector<mvre::RawStudy> raw;
  for (int i = 0; i < 10; ++i) {
    const auto& r = rows[i];
    raw.push_back(mvre::raw_from_sd_corr(std::to_string(i + 1), r[0], r[1], r[2], r[3], r[4]));
  }
  return mvre::validate_dataset(raw);
}

/// p = 2, n = 3 instance shared with tests/oracles/derive_fixtures.py.
inline mvre::Dataset small_instance() {
  std::vector<mvre::StudyObservation> s;
  s.push_back({"a", vec_of({1.0, -0.5}), mvre::SpdMatrix(mat2(0.8, 0.2, 0.2, 0.5))});
  s.push_back({"b", vec_of({2.5, 0.7}), mvre::SpdMatrix(mat2(1.5, -0.3, -0.3, 0.9))});
  s.push_back({"c", vec_of({-0.3, 1.9}), mvre::SpdMatrix(mat2(0.4, 0.1, 0.1, 1.2))});
  return mvre::Dataset(2, std::move(s));
}
inline mvre::Matrix small_psi() { return mat2(1.3, 0.4, 0.4, 0.7); }
inline mvre::Vector small_mu() { return vec_of({0.9, 0.6}); }

/// Scalar dataset from effects and within-study variances.
inline mvre::Dataset scalar_dataset(const std::vector<double>& x, const std::vector<double>& u) {
  std::vector<mvre::StudyObservation> s;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mvre::Matrix m(1, 1);
    m(0, 0) = u[i];
    s.push_back({std::to_string(i + 1), vec_of({x[i]}), mvre::SpdMatrix(m)});
  }
  return mvre::Dataset(1, std::move(s));
}

}  // namespace fixtures
