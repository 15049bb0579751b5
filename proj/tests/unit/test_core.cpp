#include "fixtures.hpp"
#include "mvre/core.hpp"
#include "mvre/randgen.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace mvre;
using fixtures::mat2;

TEST_CASE("hypertension table validates into ten bivariate studies") {
  const Dataset d = fixtures::hypertension();
  CHECK(d.n() == 10);
  CHECK(d.p() == 2);
  CHECK(d[0].u(0, 0) == doctest::Approx(0.5184).epsilon(1e-12));
  CHECK(std::abs(d[0].u(0, 1) - 0.78 * 0.72 * 0.27) < 1e-12);
  CHECK(d[0].u(1, 0) == d[0].u(0, 1));
}

TEST_CASE("a single study is too few") {
  const std::vector<RawStudy> raw{{"1", {0.0, 0.0}, {1.0, 0.0, 1.0}}};
  try {
    validate_dataset(raw);
    FAIL("expected TooFewStudies");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewStudies);
  }
}

TEST_CASE("correlation above one is rejected with the study index") {
  std::vector<RawStudy> raw{raw_from_sd_corr("1", 0, 0, 1, 0.2, 1), raw_from_sd_corr("2", 0, 0, 1, 1.5, 1),
                            raw_from_sd_corr("3", 0, 0, 1, 0.0, 1)};
  try {
    validate_dataset(raw);
    FAIL("expected NonPositiveDefinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveDefinite);
    REQUIRE(e.index().has_value());
    CHECK(*e.index() == 1);
  }
}

TEST_CASE("mixed dimensions and bad values are rejected") {
  std::vector<RawStudy> raw{{"1", {0.0, 0.0}, {1.0, 0.0, 1.0}}, {"2", {0.0}, {1.0}}};
  CHECK_THROWS_AS(validate_dataset(raw), Error);
  std::vector<RawStudy> nan{{"1", {std::nan(""), 0.0}, {1.0, 0.0, 1.0}}, {"2", {0.0, 0.0}, {1.0, 0.0, 1.0}}};
  CHECK_THROWS_AS(validate_dataset(nan), Error);
  CHECK_THROWS_AS(validate_dataset({}), Error);
}

TEST_CASE("SpdMatrix rejects asymmetric and indefinite input") {
  CHECK_THROWS_AS(SpdMatrix(mat2(1, 0.5, 0.4, 1)), Error);
  CHECK_THROWS_AS(SpdMatrix(mat2(1, 2, 2, 1)), Error);
  const SpdMatrix a(mat2(4, 2, 2, 3));
  CHECK(a.log_det() == doctest::Approx(std::log(8.0)));
  const Vector x = a.solve(fixtures::vec_of({2.0, 1.0}));
  CHECK(x(0) == doctest::Approx(0.5));
  CHECK(x(1) == doctest::Approx(0.0));
}

TEST_CASE("SpdMatrix factor reconstructs random PD matrices") {
  RngStream rng(42, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = 1 + trial % kMaxDim;
    Matrix g(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) g(i, j) = rng.normal();
    Matrix a = g * g.transpose() + 0.1 * Matrix::Identity(p, p);
    a = (0.5 * (a + a.transpose())).eval();
    const SpdMatrix s(a);
    const Matrix back = s.chol() * s.chol().transpose();
    CHECK((back - a).norm() <= 1e-12 * a.norm());
  }
}

TEST_CASE("model and sampler configuration validation") {
  ModelSpec spec;
  spec.family = Family::StudentT;
  spec.dof = 0.0;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.dof = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.dof = 4.0;
  CHECK_NOTHROW(spec.validate());

  SamplerConfig c;
  c.length = 10;
  c.burn_in = 11;
  CHECK_THROWS_AS(c.validate(), Error);
  c.burn_in = 10;
  CHECK_NOTHROW(c.validate());
  CHECK(c.retained() == 0);
  c.length = 100000;
  c.burn_in = 0;
  c.thin = 50;
  CHECK(c.retained() == 2000);
  c.thin = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("enum names round trip") {
  CHECK(parse_family(to_string(Family::StudentT)) == Family::StudentT);
  CHECK(parse_prior(to_string(Prior::Reference)) == Prior::Reference);
  CHECK(parse_mu_rejection_mode(to_string(MuRejectionMode::PaperLiteral)) == MuRejectionMode::PaperLiteral);
  CHECK_THROWS_AS(parse_family("cauchy"), Error);
}

TEST_CASE("format_number is shortest round trip") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-9.63) == "-9.63");
  const double x = 1.0 / 3.0;
  CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("format_number avoids exponents for moderate magnitudes") {
  CHECK(format_number(0.0001) == "0.0001");
  CHECK(format_number(200000) == "200000");
  CHECK(std::stod(format_number(1e-300)) == 1e-300);
}
