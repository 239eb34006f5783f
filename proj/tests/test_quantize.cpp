// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "bitrom/quantize.hpp"
#include "bitrom/rng.hpp"

using namespace bitrom;

TEST_CASE("absmean ternarization matches the hand-evaluated formula") {
  Eigen::MatrixXd w(2, 2);
  w << 0.9, -0.05, -1.2, 0.0;
  // gamma = (0.9 + 0.05 + 1.2 + 0) / 4 = 0.5375; W/gamma rounds to
  // [[2, 0], [-2, 0]] before the clamp
  const TernaryTensor t = quantize_weights_ternary(w);
  CHECK(t.scale == doctest::Approx(0.5375).epsilon(1e-12));
  CHECK(t.trits(0, 0) == 1);
  CHECK(t.trits(0, 1) == 0);
  CHECK(t.trits(1, 0) == -1);
  CHECK(t.trits(1, 1) == 0);
}

TEST_CASE("zero matrix quantizes to zero trits with scale 0") {
  const TernaryTensor t = quantize_weights_ternary(Eigen::MatrixXd::Zero(3, 4));
  CHECK(t.scale == 0.0);
  for (const Trit v : t.flat()) CHECK(v == 0);
  CHECK(sparsity(t) == 1.0);
}

TEST_CASE("identity-scaled matrix keeps signs for any gamma") {
  for (const double gamma : {0.1, 1.0, 42.0}) {
    Eigen::MatrixXd w(2, 2);
    w << gamma, -gamma, gamma, gamma;
    const TernaryTensor t = quantize_weights_ternary(w);
    CHECK(t.trits(0, 0) == 1);
    CHECK(t.trits(0, 1) == -1);
    CHECK(t.trits(1, 0) == 1);
    CHECK(t.trits(1, 1) == 1);
  }
}

TEST_CASE("quantizer is idempotent on scaled trit matrices") {
  Xoshiro256StarStar rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto rows = static_cast<Eigen::Index>(rng.next_int(1, 12));
    const auto cols = static_cast<Eigen::Index>(rng.next_int(1, 12));
    TritMatrix trits(rows, cols);
    for (Eigen::Index i = 0; i < trits.size(); ++i)
      trits.data()[i] = static_cast<Trit>(rng.next_int(-1, 1));
    const double gamma = rng.next_unit() * 10.0 + 1e-3;

    const TernaryTensor t =
        quantize_weights_ternary(trits.cast<double>() * gamma);
    CHECK(t.trits == trits);
  }
}

TEST_CASE("non-finite weights are rejected") {
  Eigen::MatrixXd w(1, 2);
  w << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(quantize_weights_ternary(w), ValidationError);
  w(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(quantize_weights_ternary(w), ValidationError);
}

TEST_CASE("activation quantization examples") {
  SUBCASE("values already at full scale") {
    Eigen::Vector3d x(7.0, -7.0, 0.0);
    const ActivationVector a = quantize_activations(x, 4);
    CHECK(a.scale == 1.0);
    CHECK(a.values[0] == 7);
    CHECK(a.values[1] == -7);
    CHECK(a.values[2] == 0);
  }
  SUBCASE("single-element absmax") {
    Eigen::VectorXd x(1);
    x << 1.0;
    const ActivationVector a = quantize_activations(x, 8);
    CHECK(a.values[0] == 127);
    CHECK(a.scale == doctest::Approx(1.0 / 127).epsilon(1e-15));
  }
  SUBCASE("hand-evaluated 4-bit case") {
    Eigen::Vector3d x(0.5, -0.25, 0.125);
    const ActivationVector a = quantize_activations(x, 4);
    CHECK(a.values[0] == 7);
    CHECK(a.values[1] == -4);  // -3.5 rounds away from zero
    CHECK(a.values[2] == 2);   // 1.75 rounds to 2
    CHECK(a.scale == doctest::Approx(0.5 / 7).epsilon(1e-15));
  }
}

TEST_CASE("activation quantization edge cases") {
  CHECK_THROWS_AS(quantize_activations(Eigen::Vector2d(1, 2), 5),
                  ValidationError);

  const ActivationVector a = quantize_activations(Eigen::Vector3d::Zero(), 8);
  CHECK(a.scale == 1.0);
  CHECK(a.values.isZero());
}

TEST_CASE("quantized activations stay inside the symmetric range") {
  Xoshiro256StarStar rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int bits = rng.next_below(2) == 0 ? 4 : 8;
    Eigen::VectorXd x(rng.next_int(1, 50));
    for (Eigen::Index i = 0; i < x.size(); ++i)
      x[i] = rng.next_symmetric() * 100.0;
    const ActivationVector a = quantize_activations(x, bits);
    a.validate();
    const int qmax = ActivationVector::qmax(bits);
    for (Eigen::Index i = 0; i < a.values.size(); ++i) {
      CHECK(a.values[i] >= -qmax);
      CHECK(a.values[i] <= qmax);
    }
    if (!x.isZero()) CHECK(a.scale > 0.0);
  }
}

TEST_CASE("tensors with any nonzero entry get a positive scale") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
  w(2, 3) = -0.25;
  const TernaryTensor t = quantize_weights_ternary(w);
  CHECK(t.scale > 0.0);
  t.validate();
}

TEST_CASE("sparsity counts zero trits") {
  TernaryTensor ones;
  ones.trits = TritMatrix::Constant(2, 4, 1);
  ones.scale = 1.0;
  CHECK(sparsity(ones) == 0.0);

  TernaryTensor mixed;
  mixed.trits.resize(2, 4);
  mixed.trits << 1, 0, -1, 0, 1, 1, 0, -1;
  mixed.scale = 1.0;
  CHECK(sparsity(mixed) == doctest::Approx(0.375));
}
