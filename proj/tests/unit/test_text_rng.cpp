#include <doctest.h>

#include "taaco/rng.hpp"
#include "taaco/text.hpp"

using namespace taaco;

TEST_CASE("display_normalize trims and collapses whitespace") {
  CHECK(display_normalize("  Watering   plants\t") == "Watering plants");
  CHECK(display_normalize("single") == "single");
  CHECK(display_normalize("   ") == "");
}

TEST_CASE("match_key lowercases the display form") {
  CHECK(match_key(" Electric  Drill ") == "electric drill");
  CHECK(match_key("Fragile ") == match_key("fragile"));
}

TEST_CASE("parse_first_int finds the first digit run") {
  CHECK(parse_first_int("Score: 7") == 7);
  CHECK(parse_first_int("10/10 would match") == 10);
  CHECK(parse_first_int("I cannot judge") == std::nullopt);
}

TEST_CASE("rng streams are deterministic and seed-sensitive") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 32; ++i) {
    double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  bool differs = false;
  Rng a2(42);
  for (int i = 0; i < 32; ++i) {
    if (a2.uniform() != c.uniform()) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("normal draws are finite and roughly centered") {
  Rng rng(7);
  double sum = 0.0;
  for (int i = 0; i < 4000; ++i) {
    double x = rng.normal();
    REQUIRE(std::isfinite(x));
    sum += x;
  }
  CHECK(std::fabs(sum / 4000.0) < 0.1);
}

TEST_CASE("shuffle is a seeded permutation") {
  std::vector<int> v1{0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<int> v2 = v1;
  Rng a(9), b(9);
  a.shuffle(v1);
  b.shuffle(v2);
  CHECK(v1 == v2);
  std::vector<int> sorted = v1;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
}
