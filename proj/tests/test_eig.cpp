#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "slgfm/smallsig.hpp"

using namespace slgfm;

namespace {

Mat companion(const std::vector<double>& c) {
  const int n = static_cast<int>(c.size()) - 1;
  Mat a = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) a(0, j) = -c[static_cast<std::size_t>(j + 1)] / c[0];
  for (int i = 1; i < n; ++i) a(i, i - 1) = 1;
  return a;
}

}  // namespace

TEST_CASE("small closed-form spectra") {
  Mat r(2, 2);
  r << 0, -1, 1, 0;
  auto l = eigs(r);
  REQUIRE(l.size() == 2);
  CHECK(std::abs(l[0] - cd(0, 1)) < 1e-14);
  CHECK(std::abs(l[1] - cd(0, -1)) < 1e-14);

  Mat d = Mat::Zero(3, 3);
  d.diagonal() << -1, -2, -3;
  l = eigs(d);
  std::vector<double> re;
  for (cd z : l) {
    CHECK(z.imag() == 0.0);
    re.push_back(z.real());
  }
  std::sort(re.begin(), re.end());
  CHECK(re[0] == doctest::Approx(-3));
  CHECK(re[1] == doctest::Approx(-2));
  CHECK(re[2] == doctest::Approx(-1));
}

TEST_CASE("companion spectrum matches the root oracle") {
  const std::vector<double> c = {1, 2, 3, 4, 5};
  CHECK(oracle::max_root_mismatch(eigs(companion(c)), oracle::aberth_roots(c)) < 1e-8);
}

TEST_CASE("random matrices: residuals, conjugate pairs, trace") {
  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  for (int n = 1; n <= 20; ++n) {
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = g(rng);
    const auto l = eigs(a);
    REQUIRE(static_cast<int>(l.size()) == n);
    const CMat v = eigenvectors(a, l);
    double worst = 0;
    cd sum = 0;
    for (int k = 0; k < n; ++k) {
      const Eigen::VectorXcd col = v.col(k);
      worst = std::max(worst, (a.cast<cd>() * col - l[static_cast<std::size_t>(k)] * col).norm() / col.norm());
      sum += l[static_cast<std::size_t>(k)];
    }
    CAPTURE(n);
    CHECK(worst < 1e-8);
    CHECK(std::abs(sum - a.trace()) < 1e-10 * n);
    for (std::size_t k = 0; k < l.size(); ++k) {
      if (l[k].imag() > 0) {
        REQUIRE(k + 1 < l.size());
        CHECK(std::abs(l[k + 1] - std::conj(l[k])) < 1e-12 * std::max(1.0, std::abs(l[k])));
      }
    }
  }
}

TEST_CASE("badly scaled matrices are balanced") {
  Mat a(3, 3);
  a << 1, 1e6, 0, 1e-6, 2, 1e5, 0, 1e-5, 3;
  const auto l = eigs(a);
  Eigen::EigenSolver<Mat> ref(a);
  std::vector<cd> want(ref.eigenvalues().data(), ref.eigenvalues().data() + 3);
  CHECK(oracle::max_root_mismatch(l, want) < 1e-9);
}

TEST_CASE("participation columns are normalized") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  Mat a(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) a(i, j) = u(rng);
  const Mat p = participation(a, eigs(a));
  for (int j = 0; j < p.cols(); ++j) CHECK(p.col(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.minCoeff() >= 0.0);
  // diagonal matrix: each mode belongs to one state
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << -1, -5, -9;
  const auto ld = eigs(d);
  const Mat pd = participation(d, ld);
  for (int j = 0; j < 3; ++j) CHECK(pd.col(j).maxCoeff() == doctest::Approx(1.0));
}

TEST_CASE("invalid input") {
  CHECK_THROWS_AS(eigs(Mat::Zero(2, 3)), std::invalid_argument);
  Mat a = Mat::Identity(2, 2);
  a(0, 1) = NAN;
  CHECK_THROWS_AS(eigs(a), std::invalid_argument);
  CHECK(eigs(Mat(0, 0)).empty());
}
