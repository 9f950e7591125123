#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "siftcad/manifest.hpp"
#include "siftcad/phantom.hpp"
#include "siftcad/sifting.hpp"

using namespace siftcad;

namespace {
double mean_in(const Volume3D& v, const BinaryMask& m) { return masked_mean(v, m); }
}  // namespace

TEST_CASE("programmed kinetic curves") {
  CHECK(kinetic_curve(KineticClass::MalignantWashout, 0) == 0.0);
  CHECK(kinetic_curve(KineticClass::MalignantWashout, 90) ==
        doctest::Approx(1.6 * (1 - std::exp(-90.0 / 40)) * std::exp(-1.2e-3 * 90)));
  CHECK(kinetic_curve(KineticClass::BenignPersistent, 360) == doctest::Approx(1.5 * (1 - std::exp(-2.0))));
  // Washout peaks then falls; persistent keeps rising.
  CHECK(kinetic_curve(KineticClass::MalignantWashout, 360) < kinetic_curve(KineticClass::MalignantWashout, 90));
  CHECK(kinetic_curve(KineticClass::BenignPersistent, 360) > kinetic_curve(KineticClass::BenignPersistent, 270));
}

TEST_CASE("noiseless lesion follows its curve") {
  PhantomSpec s;
  s.noise_sigma = 0;
  s.quantize = false;
  s.foci = 0;
  s.vessels = 0;
  LesionSpec l;
  l.center_mm = {64, 64, 48};
  l.diameter_mm = 12;
  l.shape = LesionShape::Lobulated;
  l.shape_seed = 9;
  s.lesions = {l};
  const PhantomCase pc = generate_case(s);
  const BreastCase& c = pc.breast_case;
  const BinaryMask& gt = c.ground_truth[0];
  const double m0 = mean_in(c.dce[0], gt);
  for (std::size_t i = 0; i < c.dce.size(); ++i) {
    const double e = (mean_in(c.dce[i], gt) - m0) / m0;
    CHECK(std::abs(e - kinetic_curve(l.kinetics, c.acquisition_times[i])) <= 1e-6);
  }
  // The reference mask is the re-voxelized shape.
  CHECK(voxelize_lesion(l, c.dims(), c.spacing()).storage() == gt.storage());
  CHECK(c.malignant == std::vector<bool>{true});
  CHECK(pc.analytic_volume[0] > 0.3 * sphere_volume(12));
  CHECK(pc.analytic_volume[0] < sphere_volume(12));
}

TEST_CASE("generator is deterministic and validates lesions") {
  PhantomSpec s;
  LesionSpec l;
  l.center_mm = {64, 64, 48};
  l.diameter_mm = 8;
  s.lesions = {l};
  const PhantomCase a = generate_case(s), b = generate_case(s);
  CHECK(a.breast_case.dce[1].storage() == b.breast_case.dce[1].storage());
  CHECK(a.breast_case.t2.storage() == b.breast_case.t2.storage());
  for (double x : a.breast_case.t1.storage()) CHECK(x >= 0.0);

  s.lesions[0].center_mm = {2, 2, 2};
  CHECK_THROWS_AS(generate_case(s), InvalidArgument);
}

TEST_CASE("breast and fat masks") {
  const PhantomCase pc = generate_case(PhantomSpec{});
  const BreastCase& c = pc.breast_case;
  CHECK(count(c.breast_mask) > c.breast_mask.size() / 5);
  // Otsu fat mask agrees with the generator's fat compartment.
  std::size_t inter = 0, a = 0, b = 0;
  for (std::size_t i = 0; i < c.fat_mask.size(); ++i) {
    a += c.fat_mask[i];
    b += pc.fat_truth[i] && c.breast_mask[i];
    inter += c.fat_mask[i] && pc.fat_truth[i];
  }
  CHECK(2.0 * double(inter) / double(a + b) >= 0.9);
  CHECK(breast_mask(c.t1).storage() == c.breast_mask.storage());
}

TEST_CASE("suite plan") {
  SuiteSpec s;
  s.n_cases = 30;
  s.d_min = 6;
  s.d_max = 40;
  s.train_fraction = 0.5;
  const auto plan = plan_suite(s);
  REQUIRE(plan.size() == 30);
  std::size_t lesions = 0, malignant = 0, train = 0;
  for (const auto& c : plan) {
    CHECK(!c.spec.lesions.empty());
    CHECK(c.spec.lesions.size() <= 2);
    train += c.split == "train";
    for (const auto& l : c.spec.lesions) {
      ++lesions;
      malignant += l.kinetics == KineticClass::MalignantWashout;
      CHECK(l.diameter_mm >= 6.0);
      CHECK(l.diameter_mm <= 40.0);
      if (l.rim) CHECK(l.kinetics == KineticClass::MalignantWashout);
    }
  }
  CHECK(train == 15);
  CHECK(malignant == static_cast<std::size_t>(std::lround(2.0 * double(lesions) / 3.0)));
  const auto again = plan_suite(s);
  CHECK(again[7].spec.lesions[0].center_mm == plan[7].spec.lesions[0].center_mm);
}

TEST_CASE("written suite loads back") {
  SuiteSpec s;
  s.n_cases = 2;
  s.d_min = 6;
  s.d_max = 12;
  const auto dir = std::filesystem::temp_directory_path() / "siftcad_suite_test";
  std::filesystem::remove_all(dir);
  const Manifest m = write_suite(s, dir);
  const Manifest back = load_manifest(dir / "manifest.json");
  REQUIRE(back.cases.size() == 2);
  const BreastCase c = load_case(back, back.cases[0]);
  CHECK(c.dce.size() == 5);
  CHECK(c.ground_truth.size() == m.cases[0].lesions.size());
  CHECK(back.cases[0].lesions[0].diameter_mm == doctest::Approx(m.cases[0].lesions[0].diameter_mm));
  std::filesystem::remove_all(dir);
}
