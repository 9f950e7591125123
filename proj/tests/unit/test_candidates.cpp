#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "siftcad/candidates.hpp"
#include "siftcad/phantom.hpp"

using namespace siftcad;

namespace {

double dice(const Region& a, const Region& b) {
  return 2.0 * double(intersection_size(a, b)) / double(a.size() + b.size());
}

double best_dice(const std::vector<RegionCandidate>& cands, const BinaryMask& gt) {
  const Region g = Region::from_mask(gt);
  double best = 0;
  for (const auto& c : cands) best = std::max(best, dice(original_region(c, gt.dims()), g));
  return best;
}

PhantomSpec one_ball(double d_mm) {
  PhantomSpec s;
  s.seed = 5;
  LesionSpec l;
  l.center_mm = {64, 64, 48};
  l.diameter_mm = d_mm;
  s.lesions = {l};
  return s;
}

}  // namespace

TEST_CASE("size sieve windows") {
  const double vmin = sphere_volume(4), vmax = sphere_volume(63);
  CHECK(vmin == doctest::Approx(33.5103).epsilon(1e-5));
  CHECK(vmax / 64 == doctest::Approx(2045.68).epsilon(1e-5));
  CHECK(size_sieve(vmin, 1, 3, vmin, vmax));
  CHECK(!size_sieve(vmin * 0.999, 1, 3, vmin, vmax));
  CHECK(size_sieve(vmax / 64, 1, 3, vmin, vmax));
  CHECK(!size_sieve(vmax / 63, 1, 3, vmin, vmax));
  CHECK(size_sieve(vmax / 64, 2, 3, vmin, vmax));
  CHECK(!size_sieve(vmax / 65, 2, 3, vmin, vmax));
  CHECK(size_sieve(vmax / 8, 3, 3, vmin, vmax));
  CHECK(!size_sieve(vmax / 8.1, 3, 3, vmin, vmax));
  CHECK(size_sieve(vmax, 3, 3, vmin, vmax));
  CHECK(!size_sieve(vmax * 1.001, 2, 3, vmin, vmax));
  CHECK_THROWS_AS(size_sieve(1, 4, 3, vmin, vmax), InvalidArgument);
}

TEST_CASE("coarse to fine coordinates") {
  CHECK(coarse_to_fine(5.0, 1) == 5.0);
  CHECK(coarse_to_fine(0.0, 2) == doctest::Approx(1.0 - (3.0 - std::sqrt(3.0)) / 2.0));
  CHECK(coarse_to_fine(1.0, 3) == doctest::Approx(2 * (2 + 0.3660254) + 0.3660254));
}

TEST_CASE("sifting finds a 10 mm enhancing ball") {
  const PhantomCase pc = generate_case(one_ball(10));
  std::vector<ScaleTrace> trace;
  const auto cands = generate_candidates(pc.breast_case, CandidateParams{}, &trace);
  CHECK(trace.size() == 3);
  CHECK(!cands.empty());
  CHECK(best_dice(cands, pc.breast_case.ground_truth[0]) >= 0.6);
  for (const auto& c : cands) {
    CHECK(size_sieve(c.physical_volume, c.scale, 3, sphere_volume(4), sphere_volume(63)));
    CHECK(c.threshold_index >= 1);
    CHECK(c.threshold_index <= 16);
  }
  for (std::size_t i = 0; i < cands.size(); ++i) CHECK(cands[i].id == i);

  // Deterministic.
  const auto again = generate_candidates(pc.breast_case, CandidateParams{});
  REQUIRE(again.size() == cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) CHECK(again[i].region == cands[i].region);
}

TEST_CASE("no enhancement gives no candidates") {
  PhantomSpec s = one_ball(10);
  s.noise_sigma = 0;
  s.lesions.clear();
  s.foci = 0;
  s.vessels = 0;
  s.bpe_max = 0;
  PhantomCase pc = generate_case(s);
  // Identical pre- and post-contrast frames.
  pc.breast_case.dce[1] = pc.breast_case.dce[0];
  CHECK(generate_candidates(pc.breast_case, CandidateParams{}).empty());
}

TEST_CASE("candidate JSON round trip") {
  const PhantomCase pc = generate_case(one_ball(8));
  auto cands = generate_candidates(pc.breast_case, CandidateParams{});
  REQUIRE(!cands.empty());
  cands[0].lesion_score = 0.75;
  cands[0].label = CandidateLabel::Positive;
  const auto path = std::filesystem::temp_directory_path() / "siftcad_cands.json";
  save_candidates(cands, "c1", path);
  std::string id;
  const auto back = load_candidates(path, &id);
  CHECK(id == "c1");
  REQUIRE(back.size() == cands.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].region == cands[i].region);
    CHECK(back[i].scale == cands[i].scale);
    CHECK(back[i].threshold_index == cands[i].threshold_index);
    CHECK(back[i].physical_volume == doctest::Approx(cands[i].physical_volume));
  }
  CHECK(back[0].lesion_score == 0.75);
  CHECK(back[0].label == CandidateLabel::Positive);
  CHECK(back[1].lesion_score < 0);
  std::filesystem::remove(path);
}

TEST_CASE("k-means baseline produces candidates") {
  const PhantomCase pc = generate_case(one_ball(12));
  const auto gen = make_generator("kmeans", CandidateParams{});
  CHECK(gen->name() == "kmeans");
  const auto cands = gen->generate(pc.breast_case);
  CHECK(!cands.empty());
  CHECK_THROWS_AS(make_generator("nope", CandidateParams{}), InvalidArgument);
}
