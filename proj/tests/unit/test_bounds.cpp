#include "dshfl/bounds.hpp"
#include "dshfl/rng.hpp"

#include "bound_oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace dshfl;

TEST_SUITE("bounds") {

TEST_CASE("kappa examples") {
  const std::vector<std::size_t> equal{7, 7}, mixed{10, 20}, single{13};
  CHECK(kappa(equal) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(kappa(mixed) == doctest::Approx(10.0 / 9.0).epsilon(1e-15));
  CHECK(kappa(single) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("kappa is at least 1, with equality only for equal sizes") {
  RngStream rng(1);
  for (int n = 0; n < 1000; ++n) {
    std::vector<std::size_t> sizes(1 + rng.below(6));
    for (auto& s : sizes) s = 1 + rng.below(30);
    const bool equal = std::all_of(sizes.begin(), sizes.end(), [&](auto s) { return s == sizes[0]; });
    const double k = kappa(sizes);
    if (equal) CHECK(std::abs(k - 1.0) < 1e-12);
    else CHECK(k > 1.0);
  }
}

TEST_CASE("deviation bound examples") {
  const std::vector<std::size_t> one{5}, two{4, 4};
  CHECK(lemma1_deviation_bound(3, one, 0.1, 2).total == doctest::Approx(0.8).epsilon(1e-14));
  const double a = 0.3, G = 1.7;
  CHECK(lemma1_deviation_bound(1, two, a, G).total == doctest::Approx(4 * a * a * G * G).epsilon(1e-14));
  const auto b = lemma1_deviation_bound(4, two, a, G);
  CHECK(b.group_term + b.all_groups_term == b.total);
}

TEST_CASE("single-group deviation bound stays below 4 a^2 t^2 G^2 for t >= 2") {
  const std::vector<std::size_t> one{10};
  for (std::size_t t = 2; t <= 100; ++t)
    CHECK(lemma1_deviation_bound(t, one, 0.05, 3.0).total < 4 * 0.05 * 0.05 * double(t * t) * 9.0);
}

TEST_CASE("deviation bound increases in t, alpha and G") {
  const std::vector<std::size_t> sizes{3, 9};
  for (std::size_t t = 1; t < 20; ++t) {
    CHECK(lemma1_deviation_bound(t + 1, sizes, 0.1, 1).total > lemma1_deviation_bound(t, sizes, 0.1, 1).total);
    CHECK(lemma1_deviation_bound(t, sizes, 0.11, 1).total > lemma1_deviation_bound(t, sizes, 0.1, 1).total);
    CHECK(lemma1_deviation_bound(t, sizes, 0.1, 1.1).total > lemma1_deviation_bound(t, sizes, 0.1, 1).total);
  }
}

TEST_CASE("group bound: U = 1 zeroes the cross-round terms") {
  const std::vector<std::size_t> sizes{4, 6};
  const IterationHistory h({{3, 5}});
  const auto r = theorem1_group_bound({0.1, 1, 1, 1}, sizes, 0, h, 2.0);
  CHECK(r.term(2) == 0.0);
  CHECK(r.term(3) == 0.0);
}

TEST_CASE("group bound hand-built case") {
  const std::vector<std::size_t> sizes{10};
  const IterationHistory h({{2}, {3}});
  const double gap = 1.5;
  const auto r = theorem1_group_bound({0.1, 1, 1, 1}, sizes, 0, h, gap);
  // sum t = 5, kappa = 1, U - 1 = 1, sum over rounds 1..U-1 of t^2 = 4.
  const double expect = 2 / (0.1 * 5) * gap + 0.1 * 1 * 1 / 10.0 + (1 / (0.1 * 5) + 2 * 2 * 1 * 0.1 / 5) * 1 +
                        2 * 2 * 0.1 / 5 * 4;
  CHECK(std::abs(r.total - expect) < 1e-10);
}

TEST_CASE("group bound limits as alpha shrinks") {
  const std::vector<std::size_t> sizes{3};
  const IterationHistory h({{2}, {4}, {3}});
  const auto small = theorem1_group_bound({1e-9, 1, 1, 1}, sizes, 0, h, 1.0);
  CHECK(small.term(0) > 1e8);
  CHECK(small.term(1) < 1e-8);
  CHECK(small.term(3) < 1e-8);
}

TEST_CASE("global bound degenerate histories") {
  const std::vector<std::size_t> one{5};
  const auto h = IterationHistory::constant(std::vector<std::size_t>{1}, 6);
  const auto r = theorem2_global_bound({0.1, 2, 1, 0}, one, h, 1.0);
  CHECK(r.term(4) == 0.0);
  CHECK(r.term(1) == 0.0);
}

TEST_CASE("sum of squares closed form") {
  CHECK(sum_of_squares_below(4) == 14.0);
  for (std::size_t t = 0; t <= 10000; ++t) REQUIRE(sum_of_squares_below(t) == bound_oracle::sum_l2(t));
}

TEST_CASE("t_max examples") {
  CHECK(t_max(8, 7) == 2);
  CHECK(t_max(5, 1) == 5);
  CHECK(t_max(0, 3) == 1);
  CHECK_THROWS(t_max(1, 0));
}

TEST_CASE("corollary rate examples") {
  CHECK(corollary_rate(100, 1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(corollary_rate(1, 10) == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("closed-form bound equals the global bound on a constant history") {
  RngStream rng(2);
  for (int n = 0; n < 200; ++n) {
    CorollaryInputs in;
    in.L = 0.5 + 3 * rng.uniform();
    in.G = 0.1 + 2 * rng.uniform();
    in.sigma = rng.uniform();
    in.rounds = 1 + rng.below(50);
    in.loss_gap = rng.uniform();
    for (std::size_t g = 0; g < 1 + rng.below(4); ++g) {
      in.group_sizes.push_back(1 + rng.below(20));
      in.t_max.push_back(1 + rng.below(12));
    }
    const auto c = corollary_bound(in);
    const auto h = IterationHistory::constant(in.t_max, in.rounds);
    const auto t2 = theorem2_global_bound(c.params, in.group_sizes, h, in.loss_gap);
    CHECK(std::abs(c.total - t2.total) <= 1e-12 * std::max(1.0, t2.total));
  }
}

TEST_CASE("quadrupling U halves the 1/sqrt(U) envelope terms") {
  CorollaryInputs in;
  in.L = 1;
  in.G = 1;
  in.sigma = 1;
  in.group_sizes = {5, 10};
  in.t_max = {3, 4};
  in.loss_gap = 2;
  in.rounds = 10000;
  const auto a = corollary_envelope(in);
  in.rounds = 40000;
  const auto b = corollary_envelope(in);
  CHECK(b.term(0) == doctest::Approx(a.term(0) / 2).epsilon(1e-14));
  CHECK(b.term(1) == doctest::Approx(a.term(1) / 2).epsilon(1e-14));
  CHECK(b.term(2) == doctest::Approx(a.term(2) / 4).epsilon(1e-14));
}

TEST_CASE("report totals equal the sum of terms and premise flag is set") {
  const std::vector<std::size_t> sizes{2, 3};
  const IterationHistory h({{1, 2}, {3, 1}});
  const auto r = theorem2_global_bound({0.9, 2, 1, 1}, sizes, h, 1.0);
  double sum = 0.0;
  for (const auto& t : r.terms) sum += t.value;
  CHECK(std::abs(sum - r.total) <= 1e-12);
  CHECK(r.premise_violated);
  CHECK_THROWS(theorem2_global_bound({0.1, 1, 1, 1}, sizes, IterationHistory{}, 1.0));
}

}
