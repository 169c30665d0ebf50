#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "gliocontrol/errors.hpp"
#include "gliocontrol/fields.hpp"
#include "gliocontrol/random.hpp"
#include "helpers.hpp"

using namespace gliocontrol;
using testing::line;
using testing::square;

TEST_CASE("grid construction") {
  const Grid g = square(4);
  CHECK(g.size() == 16);
  CHECK(g.spacing(0) == doctest::Approx(0.25));
  CHECK(g.spacing(1) == doctest::Approx(0.25));

  const Grid l = line(8, 2.0);
  CHECK(l.size() == 8);
  CHECK(l.spacing(0) == doctest::Approx(0.25));
  CHECK(l.volume() == doctest::Approx(2.0));

  const double ext[] = {1.0, 1.0};
  const int zero_cells[] = {0, 4};
  CHECK_THROWS_AS(Grid::build(2, ext, zero_cells), ConfigError);
  const double bad_ext[] = {-1.0, 1.0};
  const int cells[] = {4, 4};
  CHECK_THROWS_AS(Grid::build(2, bad_ext, cells), ConfigError);
  CHECK_THROWS_AS(Grid::build(3, ext, cells), ConfigError);
}

TEST_CASE("time grid") {
  const TimeGrid t(2.0, 8);
  CHECK(t.dt() == 0.25);
  CHECK(t.time(8) == 2.0);
  CHECK_THROWS_AS(TimeGrid(0.0, 4), ConfigError);
  CHECK_THROWS_AS(TimeGrid(1.0, 0), ConfigError);
}

TEST_CASE("cell centers are row-major with axis 0 slow") {
  const Grid g = square(4);
  const auto c = g.center(1);
  CHECK(c[0] == doctest::Approx(0.125));
  CHECK(c[1] == doctest::Approx(0.375));
}

TEST_CASE("laplacian of a constant vanishes") {
  const Field f(square(8), 3.7);
  CHECK(norm_linf(laplacian(f)) == 0.0);
}

TEST_CASE("laplacian eigenmode converges at second order") {
  constexpr double pi = std::numbers::pi;
  auto error = [&](int n) {
    const double L = 2.0;
    const Grid g = line(n, L);
    const Field f = Field::from_function(g, [&](const std::array<double, 2>& x) { return std::cos(pi * x[0] / L); });
    const Field expected = -(pi / L) * (pi / L) * f;
    return norm_linf(laplacian(f) - expected);
  };
  const double ratio = error(32) / error(64);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
  CHECK(error(64) < 1e-3);
}

TEST_CASE("laplacian is conservative, symmetric and negative semi-definite") {
  Rng rng(7);
  for (const Grid& g : {square(12), line(20), square(5, 3.0)}) {
    for (int draw = 0; draw < 10; ++draw) {
      const Field f = rng.field(g, -1.0, 1.0);
      const Field h = rng.field(g, -1.0, 1.0);
      const Field lf = laplacian(f);
      CHECK(std::abs(integrate(lf)) <= 1e-12 * norm_linf(f) * static_cast<double>(g.size()));
      const double a = inner(lf, h), b = inner(f, laplacian(h));
      CHECK(std::abs(a - b) <= 1e-10 * std::max(std::abs(a), 1.0));
      CHECK(inner(lf, f) <= 1e-12);
    }
  }
}

TEST_CASE("integrate uses midpoint quadrature") {
  CHECK(integrate(Field(square(4), 3.0)) == doctest::Approx(3.0));

  const Grid g = square(4);
  Field half(g);
  for (std::size_t i = 0; i < g.size() / 2; ++i) half[i] = 1.0;
  CHECK(integrate(half) == doctest::Approx(0.5));

  const Grid l = line(64);
  const Field x = Field::from_function(l, [](const std::array<double, 2>& p) { return p[0]; });
  CHECK(std::abs(integrate(x) - 0.5) <= 1e-12);
}

TEST_CASE("norms") {
  const Grid g = square(10);
  CHECK(norm_l2(Field(g)) == 0.0);
  CHECK(norm_linf(Field(g)) == 0.0);
  CHECK(norm_l2(Field(square(4), 2.0)) == doctest::Approx(2.0));
  CHECK(norm_linf(Field(square(4), -2.0)) == 2.0);

  Field spike(g);
  spike[37] = 5.0;
  CHECK(norm_linf(spike) == 5.0);
  CHECK(norm_l2(spike) == doctest::Approx(0.5));
}

TEST_CASE("h1 seminorm of a linear profile") {
  const Grid g = line(16);
  const Field f = Field::from_function(g, [](const std::array<double, 2>& x) { return 2.0 * x[0]; });
  // Interior differences only: (n - 1) faces of slope 2 over width h.
  const double h = g.spacing(0);
  CHECK(seminorm_h1(f) == doctest::Approx(std::sqrt(15.0 * 4.0 * h)));
  CHECK(seminorm_h1(Field(g, 1.0)) == 0.0);
}

TEST_CASE("space-time norms") {
  const Grid g = square(4);
  const FieldSeries s{Field(g, 1.0), Field(g, 2.0), Field(g, 3.0)};
  CHECK(sup_norm_l2(s) == doctest::Approx(3.0));
  CHECK(norm_l2_spacetime(s, 0.5) == doctest::Approx(std::sqrt(0.5 * (1.0 + 4.0 + 9.0))));
}

TEST_CASE("field arithmetic and grid checks") {
  const Grid g = square(4);
  Field a(g, 1.0);
  const Field b(g, 2.0);
  CHECK((a + b)[3] == 3.0);
  CHECK((a - b)[3] == -1.0);
  CHECK((2.5 * b)[0] == 5.0);
  CHECK(hadamard(b, b)[5] == 4.0);
  a.axpy(-0.5, b);
  CHECK(a.max() == 0.0);
  const Field other(square(5), 1.0);
  CHECK_THROWS_AS(a += other, ConfigError);
  CHECK_THROWS_AS(Field(g, std::vector<double>(3, 1.0)), ConfigError);
}

TEST_CASE("snapshot round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gliocontrol_test_snapshots";
  fs::create_directories(dir);
  Rng rng(11);
  const Grid g = square(6, 2.0);
  const Field f = rng.field(g, -3.0, 3.0);
  const std::string stem = (dir / "single").string();
  write_snapshot(stem, f);
  CHECK(read_snapshot(stem) == f);
  CHECK(fs::file_size(stem + ".bin") == g.size() * 8);

  const FieldSeries s{rng.field(g, 0, 1), rng.field(g, 0, 1), rng.field(g, 0, 1)};
  write_snapshot_series((dir / "series").string(), s);
  const SnapshotHeader h = read_snapshot_header((dir / "series").string());
  CHECK(h.slices == 3);
  CHECK(h.grid == g);
  CHECK(read_snapshot_series((dir / "series").string()) == s);
  CHECK_THROWS_AS(read_snapshot((dir / "series").string()), ConfigError);
  CHECK_THROWS_AS(read_snapshot((dir / "missing").string()), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("csv export has one row per cell") {
  const Field f(square(4), 1.5);
  std::ostringstream os;
  write_csv(os, f);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 17);
}
