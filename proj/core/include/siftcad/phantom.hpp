#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "siftcad/breast_case.hpp"
#include "siftcad/manifest.hpp"

namespace siftcad {

enum class LesionShape { Ball, Lobulated, Segmental };
enum class KineticClass { MalignantWashout, BenignPersistent };

const char* shape_name(LesionShape s);

struct LesionSpec {
  std::array<double, 3> center_mm{0, 0, 0};
  LesionShape shape = LesionShape::Ball;
  double diameter_mm = 10.0;
  KineticClass kinetics = KineticClass::MalignantWashout;
  bool rim = false;  ///< bright T2 shell around the lesion (edema)
  std::uint64_t shape_seed = 0;
};

struct PhantomSpec {
  std::uint64_t seed = 1;
  Dims dims{128, 128, 64};
  Spacing spacing{1.0, 1.0, 1.5};
  Side side = Side::Left;
  std::vector<LesionSpec> lesions;
  double noise_sigma = 8.0;
  bool quantize = true;  ///< round to integers, as a 16-bit scanner would
  std::vector<double> times{0, 90, 180, 270, 360};
  double bpe_max = 0.35;   ///< peak background parenchymal enhancement
  int foci = 6;            ///< small enhancing non-lesion blobs
  int vessels = 3;         ///< thin enhancing tubes
  bool gland_texture = true;
};

/// Programmed relative enhancement of a lesion class at time t (s).
double kinetic_curve(KineticClass k, double t);

struct PhantomCase {
  BreastCase breast_case;
  std::vector<LesionSpec> lesions;
  BinaryMask fat_truth;                 ///< fat compartment from the generator
  std::vector<double> analytic_volume;  ///< per lesion, mm^3
};

/// Deterministic for a given spec. Throws if a lesion leaves the breast.
PhantomCase generate_case(const PhantomSpec& spec, const std::string& id = "case");

/// Voxels whose centre lies inside the lesion's analytic shape.
BinaryMask voxelize_lesion(const LesionSpec& l, Dims dims, Spacing spacing);
/// The breast half-ellipsoid used by the generator for these dims.
BinaryMask phantom_breast(Dims dims, Spacing spacing);

struct SuiteSpec {
  std::size_t n_cases = 20;
  std::uint64_t seed = 2024;
  double d_min = 4.0;
  double d_max = 63.0;
  double train_fraction = 0.5;
  double noise_sigma = 8.0;
};

struct SuiteCase {
  PhantomSpec spec;
  std::string id;
  std::string split;
};

/// Lesion plans for a suite: sizes stratified log-uniformly over
/// [d_min, d_max], malignant:benign 2:1, ball/lobulated/segmental mix,
/// first train_fraction of the cases for training.
std::vector<SuiteCase> plan_suite(const SuiteSpec& s);

/// Generates and writes every case plus manifest.json under `dir`.
Manifest write_suite(const SuiteSpec& s, const std::filesystem::path& dir);

}  // namespace siftcad
