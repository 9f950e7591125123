#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "siftcad/features.hpp"
#include "siftcad/phantom.hpp"

using namespace siftcad;

namespace {

BinaryMask ball(Dims d, Spacing sp, std::array<double, 3> c_mm, double r_mm) {
  BinaryMask m(d, sp, 0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto p = m.coords(i);
    double s = 0;
    for (std::size_t a = 0; a < 3; ++a) s += std::pow(double(p[a]) * sp[a] - c_mm[a], 2);
    m[i] = s <= r_mm * r_mm;
  }
  return m;
}

double dice(const Region& a, const Region& b) {
  return 2.0 * double(intersection_size(a, b)) / double(a.size() + b.size());
}

RegionCandidate candidate_from(const BinaryMask& m) {
  RegionCandidate rc;
  rc.region = Region::from_mask(m);
  rc.spacing = m.spacing();
  rc.physical_volume = double(rc.region.size()) * m.spacing().voxel_volume();
  return rc;
}

PhantomSpec single_lesion(bool rim, KineticClass k = KineticClass::MalignantWashout) {
  PhantomSpec s;
  s.seed = 77;
  s.gland_texture = false;
  s.foci = 0;
  s.vessels = 0;
  LesionSpec l;
  l.center_mm = {64, 64, 48};
  l.diameter_mm = 10;
  l.rim = rim;
  l.kinetics = k;
  s.lesions = {l};
  return s;
}

}  // namespace

TEST_CASE("distance transform matches exhaustive search") {
  std::mt19937_64 rng(3);
  const Dims d{9, 7, 5};
  const Spacing sp{1.0, 1.3, 2.0};
  std::vector<std::uint8_t> f(d.nx * d.ny * d.nz, 0);
  for (auto& x : f) x = rng() % 13 == 0;
  const auto fast = squared_distance_transform(f, d, sp);
  const auto slow = oracle::brute_sq_edt(f, d, sp);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));

  std::vector<std::uint8_t> none(f.size(), 0);
  for (double v : squared_distance_transform(none, d, sp)) CHECK(std::isinf(v));
}

TEST_CASE("shell of a ball agrees with the analytic signed distance") {
  const Dims d{40, 40, 40};
  const Spacing sp{1, 1, 1};
  const std::array<double, 3> c{20, 20, 20};
  const Region r = Region::from_mask(ball(d, sp, c, 10.0));
  const Shell s = shell_mask(r, 1.0, 2.0, sp);
  BinaryMask ref(d, sp, 0);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const auto p = ref.coords(i);
    double q = 0;
    for (std::size_t a = 0; a < 3; ++a) q += std::pow(double(p[a]) - c[a], 2);
    const double sd = std::sqrt(q) - 10.0;
    ref[i] = sd >= -1.0 && sd <= 2.0;
  }
  CHECK(dice(s.mask, Region::from_mask(ref)) >= 0.95);

  CHECK_THROWS_AS(shell_mask(r, 0.0, 0.0, sp), InvalidArgument);
  const Region deep = erode_region(r, 1.0 + 1e-6, sp);
  CHECK(!deep.empty());
  CHECK(intersection_size(deep, s.mask) == 0);
}

TEST_CASE("moments and percentiles") {
  const std::vector<double> c(17, 3.25);
  const Moments m = moments(c);
  CHECK(m.mean == 3.25);
  CHECK(m.std == 0.0);
  CHECK(percentile(c, 20) == 3.25);
  CHECK(percentile(c, 90) == 3.25);

  std::vector<double> sym;
  for (int i = 0; i < 30; ++i) sym.insert(sym.end(), {-1.0, 0.0, 1.0});
  CHECK(std::abs(moments(sym).skewness) <= 1e-12);
  // Pearson's convention: 1.5 for three equally likely values of this kind.
  CHECK(moments(sym).kurtosis == doctest::Approx(1.5));

  CHECK(percentile({1, 2, 3, 4}, 50) == doctest::Approx(2.5));
  CHECK(percentile({10, 0, 20}, 25) == doctest::Approx(5.0));
  CHECK_THROWS(percentile({}, 50));
}

TEST_CASE("bright T2 rim raises the 2 mm edema percentile") {
  const PhantomCase with = generate_case(single_lesion(true));
  const PhantomCase without = generate_case(single_lesion(false));
  FeatureContext cw(with.breast_case, 1), co(without.breast_case, 1);
  const double a = intensity_features(candidate_from(with.breast_case.ground_truth[0]), cw).get("t2_edema_p92_2mm");
  const double b = intensity_features(candidate_from(without.breast_case.ground_truth[0]), co).get("t2_edema_p92_2mm");
  CHECK(a >= 2.0 * b);
}

TEST_CASE("GLCM matches naive pair counting") {
  std::mt19937_64 rng(11);
  const Dims d{10, 10, 10};
  Volume3D v = oracle::random_volume(rng, d, {1, 1, 1}, -5, 40);
  BinaryMask m(d, {1, 1, 1}, 0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng() % 3 != 0;
  const Region r = Region::from_mask(m);
  const auto fast = glcm(v, r);
  const auto slow = oracle::naive_glcm(v, m, kHaralickLevels);
  for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));

  const auto h = haralick_from_glcm(fast, kHaralickLevels);
  const auto o = oracle::haralick_direct(slow, kHaralickLevels);
  CHECK(h[0] == doctest::Approx(o.asm_));
  CHECK(h[1] == doctest::Approx(o.contrast));
  CHECK(h[2] == doctest::Approx(o.correlation));
  CHECK(h[4] == doctest::Approx(o.idm));
  CHECK(h[8] == doctest::Approx(o.entropy));
}

TEST_CASE("Haralick special cases") {
  const Dims d{6, 6, 6};
  Volume3D v(d, {1, 1, 1}, 7.0);
  BinaryMask m(d, {1, 1, 1}, 1);
  const Region r = Region::from_mask(m);
  const auto h = haralick(v, r);
  CHECK(h[0] == doctest::Approx(1.0));
  CHECK(h[1] == 0.0);
  CHECK(h[8] == 0.0);

  // Two-level checkerboard.
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto p = v.coords(i);
    v[i] = (p[0] + p[1] + p[2]) % 2 ? 1.0 : 0.0;
  }
  const auto hc = haralick(v, r);
  const auto o = oracle::haralick_direct(oracle::naive_glcm(v, m, kHaralickLevels), kHaralickLevels);
  CHECK(hc[1] == doctest::Approx(o.contrast));
  CHECK(hc[1] > 0);

  // Region-local quantization makes the statistics affine invariant.
  std::mt19937_64 rng(5);
  Volume3D w = oracle::random_volume(rng, d, {1, 1, 1});
  Volume3D w2 = w;
  for (double& x : w2.storage()) x = 4.0 * x + 100.0;
  const auto a = haralick(w, r), b = haralick(w2, r);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-9));

  bool single = false;
  BinaryMask one(d, {1, 1, 1}, 0);
  one(2, 2, 2) = 1;
  const auto z = haralick(w, Region::from_mask(one), &single);
  CHECK(single);
  for (double x : z) CHECK(x == 0.0);
}

TEST_CASE("margin sharpness and radial gradient index") {
  const Dims d{40, 40, 40};
  const Spacing sp{1, 1, 1};
  const BinaryMask b = ball(d, sp, {20, 20, 20}, 8.0);
  Volume3D v(d, sp, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = b[i] ? 100.0 : 0.0;
  const Region r = Region::from_mask(b);
  CHECK(radial_gradient_index(v, r) <= -0.9);

  const Volume3D flat(d, sp, 5.0);
  CHECK(margin_sharpness(flat, r) == 0.0);
  CHECK(radial_gradient_index(flat, r) == 0.0);

  // 3-voxel box blur along every axis.
  Volume3D blur = v;
  for (std::size_t axis = 0; axis < 3; ++axis) {
    Volume3D src = blur;
    const std::size_t step = axis == 0 ? 1 : axis == 1 ? d.nx : d.nx * d.ny;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto p = v.coords(i);
      if (p[axis] == 0 || p[axis] + 1 == d[axis]) continue;
      blur[i] = (src[i - step] + src[i] + src[i + step]) / 3.0;
    }
  }
  CHECK(margin_sharpness(blur, r) < margin_sharpness(v, r));
}

TEST_CASE("shape features") {
  const Dims d{24, 24, 24};
  const Spacing sp{1, 1, 1};
  const Region r = Region::from_mask(ball(d, sp, {12, 12, 12}, 8.0));
  const double vol = double(r.size());
  const ShapeFeatures f = shape_features(r, sp, vol, nullptr);
  CHECK(std::abs(f.esd - 16.0) / 16.0 <= 0.05);
  CHECK(f.solidity >= 0.95);
  CHECK(f.irregularity <= 0.15);

  BinaryMask one(d, sp, 0);
  one(3, 4, 5) = 1;
  const ShapeFeatures s = shape_features(Region::from_mask(one), sp, 1.0, nullptr);
  CHECK(s.esd == doctest::Approx(1.2407).epsilon(1e-4));
  CHECK(s.extent == 1.0);
  CHECK(s.solidity == doctest::Approx(1.0));

  const BinaryMask fat(d, sp, 0);
  CHECK(shape_features(r, sp, vol, &fat).fat_fraction == 0.0);

  // Hull of a box of voxels is the box; an L of two boxes has a known hull.
  BinaryMask box(d, sp, 0), ell(d, sp, 0);
  for (std::size_t z = 2; z < 7; ++z)
    for (std::size_t y = 3; y < 7; ++y)
      for (std::size_t x = 5; x < 8; ++x) box(x, y, z) = 1;
  CHECK(convex_hull_volume(Region::from_mask(box), {0.5, 1.0, 2.0}) == doctest::Approx(60 * 1.0));
  // Planar L of three voxels: the triangle holds no further centre.
  ell(0, 0, 0) = ell(1, 0, 0) = ell(0, 0, 1) = 1;
  CHECK(convex_hull_volume(Region::from_mask(ell), sp) == doctest::Approx(3.0));
  // Filling the corner of a digital L adds the missing voxel.
  BinaryMask corner(d, sp, 0);
  for (std::size_t k = 0; k < 4; ++k) corner(3 + k, 3, 3) = corner(3, 3 + k, 3) = corner(3 + k, 3, 4) = corner(3, 3 + k, 4) = 1;
  // Two stacked L's with arms of 4: the hull adds the triangle strictly
  // between the arms, 3 centres per layer.
  CHECK(convex_hull_volume(Region::from_mask(corner), sp) == doctest::Approx(2 * (7 + 3)));
  // Collinear voxels.
  BinaryMask line(d, sp, 0);
  line(1, 1, 1) = line(9, 1, 1) = 1;
  CHECK(convex_hull_volume(Region::from_mask(line), sp) == doctest::Approx(9.0));
}

TEST_CASE("curve features and the parametric fit") {
  const std::vector<double> t{0, 90, 180, 270};
  const CurveFeatures w = curve_features({0, 1.0, 0.8, 0.6}, t);
  CHECK(w.peak == 1.0);
  CHECK(w.time_to_peak == 90.0);
  CHECK(w.washout == doctest::Approx(0.4 / 180));
  CHECK(w.uptake == doctest::Approx(1.0 / 90));

  const CurveFeatures p = curve_features({0, 0.4, 0.7, 0.9}, t);
  CHECK(p.washout == 0.0);
  CHECK(p.time_to_peak == 270.0);

  const CurveFeatures f = curve_features({0, 0, 0, 0}, t);
  CHECK(f.peak == 0.0);
  CHECK(f.time_to_peak == 0.0);
  CHECK(f.uptake == 0.0);
  CHECK(f.washout == 0.0);
  const ParametricFit pf = fit_enhancement({0, 0, 0, 0}, t);
  CHECK(pf.A == 0.0);

  const std::vector<double> tt{0, 90, 180, 270, 360};
  std::vector<double> e;
  for (double x : tt) e.push_back(kinetic_curve(KineticClass::MalignantWashout, x));
  const ParametricFit fit = fit_enhancement(e, tt);
  CHECK(fit.rmse <= 1e-6);
  CHECK(fit.A == doctest::Approx(1.6).epsilon(1e-3));
  CHECK(fit.alpha == doctest::Approx(1.0 / 40).epsilon(1e-3));
  CHECK(fit.beta == doctest::Approx(1.2e-3).epsilon(1e-3));
}

TEST_CASE("extraction on a phantom case") {
  PhantomSpec s = single_lesion(false);
  LesionSpec benign = s.lesions[0];
  benign.center_mm = {40, 70, 48};
  benign.kinetics = KineticClass::BenignPersistent;
  s.lesions.push_back(benign);
  const PhantomCase pc = generate_case(s);
  const FeatureContext ctx(pc.breast_case, 1);
  const RegionCandidate mal = candidate_from(pc.breast_case.ground_truth[0]);
  const RegionCandidate ben = candidate_from(pc.breast_case.ground_truth[1]);
  const FeatureVector fm = extract_all(mal, ctx), fb = extract_all(ben, ctx);
  CHECK(fm.names == feature_schema(pc.breast_case.dce.size()));
  CHECK(fm.schema == feature_schema_id(5));
  CHECK(fm.size() == fb.size());
  CHECK(extract_all(mal, ctx).values == fm.values);
  for (double x : fm.values) CHECK(std::isfinite(x));
  CHECK(fm.get("kin_washout") > 0.0);
  CHECK(fb.get("kin_washout") == 0.0);
  CHECK(fm.get("esd") == doctest::Approx(std::cbrt(6 * mal.physical_volume / std::numbers::pi)));

  // Scaling every DCE frame leaves relative enhancement alone.
  BreastCase scaled = pc.breast_case;
  for (auto& f : scaled.dce)
    for (double& x : f.storage()) x *= 3.0;
  const FeatureContext cs(scaled, 1);
  const FeatureVector ks = kinetic_features(mal, cs), k0 = kinetic_features(mal, ctx);
  for (std::size_t i = 0; i < ks.size(); ++i) CHECK(ks.values[i] == doctest::Approx(k0.values[i]).epsilon(1e-9));

  // Fat-normalized intensities do not change under a global rescale.
  BreastCase doubled = pc.breast_case;
  for (Volume3D* v : {&doubled.t1, &doubled.t2, &doubled.dce[0]})
    for (double& x : v->storage()) x *= 2.0;
  doubled.fat_mask = fat_mask(doubled.t1, doubled.breast_mask);
  const FeatureContext cd(doubled, 1);
  const FeatureVector i0 = intensity_features(mal, ctx), i2 = intensity_features(mal, cd);
  for (std::size_t i = 0; i < i0.size(); ++i) CHECK(i0.values[i] == doctest::Approx(i2.values[i]).epsilon(1e-9));
}
