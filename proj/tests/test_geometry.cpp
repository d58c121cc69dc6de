#include <doctest.h>

#include <cmath>

#include "plasmodicke/constants.hpp"
#include "plasmodicke/geometry.hpp"

using namespace plasmodicke;

TEST_SUITE("geometry") {

TEST_CASE("ring emitters sit on the equator at radius R + h") {
  NanoSphere sphere;
  const EmitterSet set = place_ring(6, 20.0, "azimuthal", sphere, 2.77);
  REQUIRE(set.size() == 6);
  for (const Emitter& e : set.items) {
    CHECK(e.position_nm.norm() == doctest::Approx(35.0).epsilon(1e-14));
    CHECK(e.position_nm.z() == doctest::Approx(0.0));
    CHECK(e.orientation.norm() == doctest::Approx(1.0).epsilon(1e-14));
    // azimuthal means along the polar axis, tangent to the sphere
    CHECK(e.orientation.dot(Vector3d::UnitZ()) == doctest::Approx(1.0));
  }
  const double step = set.items[1].position_nm.dot(set.items[0].position_nm) / (35.0 * 35.0);
  CHECK(step == doctest::Approx(std::cos(kPi / 3.0)).epsilon(1e-12));
}

TEST_CASE("radial ring points along the position direction") {
  NanoSphere sphere;
  const EmitterSet set = place_ring(4, 5.0, "radial", sphere, 2.77);
  for (const Emitter& e : set.items)
    CHECK(e.orientation.dot(e.position_nm.normalized()) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("pair separation equals the requested angle") {
  NanoSphere sphere;
  for (double theta : {0.0, 0.7, kPi / 2.0, kPi}) {
    const EmitterSet set = place_pair(theta, 20.0, "radial", sphere, 2.771);
    REQUIRE(set.size() == 2);
    const double cosang = set.items[0].position_nm.normalized().dot(
        set.items[1].position_nm.normalized());
    CHECK(cosang == doctest::Approx(std::cos(theta)).epsilon(1e-12));
    for (const Emitter& e : set.items)
      CHECK(e.orientation.dot(e.position_nm.normalized()) ==
            doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("azimuthal pair keeps both dipoles parallel") {
  NanoSphere sphere;
  const EmitterSet set = place_pair(kPi, 20.0, "azimuthal", sphere, 2.771);
  CHECK(set.items[0].orientation.dot(set.items[1].orientation) ==
        doctest::Approx(1.0).epsilon(1e-14));
  for (const Emitter& e : set.items)
    CHECK(std::abs(e.orientation.dot(e.position_nm.normalized())) < 1e-14);
}

TEST_CASE("polar layout splits emitters between the poles") {
  NanoSphere sphere;
  const EmitterSet set = place_polar(6, 20.0, sphere, 2.7931);
  REQUIRE(set.size() == 6);
  int north = 0, south = 0;
  for (const Emitter& e : set.items) (e.position_nm.z() > 0.0 ? north : south)++;
  CHECK(north == 3);
  CHECK(south == 3);
  // tilted off the pole by the default 1 degree, all positions distinct
  for (const Emitter& e : set.items)
    CHECK(std::abs(e.position_nm.z()) ==
          doctest::Approx(35.0 * std::cos(kPi / 180.0)).epsilon(1e-12));
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j)
      CHECK((set.items[i].position_nm - set.items[j].position_nm).norm() > 1e-3);
}

TEST_CASE("unknown orientation is rejected") {
  NanoSphere sphere;
  CHECK_THROWS_AS(place_ring(3, 10.0, "diagonal", sphere, 2.77), std::invalid_argument);
  CHECK_THROWS_AS(place_pair(1.0, 10.0, "up", sphere, 2.77), std::invalid_argument);
  CHECK_THROWS_AS(place_ring(0, 10.0, "radial", sphere, 2.77), std::invalid_argument);
  CHECK_THROWS_AS(place_ring(3, -1.0, "radial", sphere, 2.77), std::invalid_argument);
}

TEST_CASE("validate flags emitters inside the sphere and bad controls") {
  SystemConfig config;
  config.emitters = place_ring(2, 10.0, "radial", config.sphere, 2.77);
  CHECK(validate(config).empty());

  SystemConfig inside = config;
  inside.emitters.items[0].position_nm = Vector3d(5.0, 0.0, 0.0);  // radius is 15
  const auto problems = validate(inside);
  REQUIRE(problems.size() == 1);
  CHECK(problems[0].find("inside") != std::string::npos);

  SystemConfig bad = config;
  bad.controls.max_multipole = 0;
  bad.emitters.items[1].omega0_eV = -1.0;
  CHECK(validate(bad).size() == 2);

  SystemConfig empty;
  CHECK_FALSE(validate(empty).empty());
}

}  // TEST_SUITE
