#include "siftcad/breast_case.hpp"

#include <limits>

#include "siftcad/region.hpp"
#include "siftcad/threshold.hpp"

namespace siftcad {

const char* side_name(Side s) { return s == Side::Left ? "left" : "right"; }

Side parse_side(const std::string& s) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  throw FormatError("unknown breast side '" + s + "'");
}

void BreastCase::validate() const {
  const std::string who = "case " + id;
  if (t1.empty()) throw InvalidArgument(who + ": empty T1");
  if (dce.size() < 2) throw InvalidArgument(who + ": need at least 2 DCE frames");
  if (acquisition_times.size() != dce.size()) {
    throw InvalidArgument(who + ": one acquisition time per DCE frame required");
  }
  for (std::size_t i = 1; i < acquisition_times.size(); ++i) {
    if (!(acquisition_times[i] > acquisition_times[i - 1])) {
      throw InvalidArgument(who + ": acquisition times must be strictly increasing");
    }
  }
  require_same_geometry(t1, t2, "case t2");
  for (const auto& f : dce) require_same_geometry(t1, f, "case dce");
  require_same_geometry(t1, breast_mask, "case breast mask");
  require_same_geometry(t1, fat_mask, "case fat mask");
  for (const auto& g : ground_truth) require_same_geometry(t1, g, "case ground truth");
  if (malignant.size() != ground_truth.size()) {
    throw InvalidArgument(who + ": malignancy flags must match the lesion count");
  }
}

BinaryMask breast_mask(const Volume3D& t1) {
  const double th = otsu_threshold(t1);
  BinaryMask fg = binarize(t1, th);
  if (count(fg) == 0) throw DegenerateInput("breast_mask: empty foreground");
  return fill_holes_axial(largest_component(fg));
}

std::pair<BinaryMask, BinaryMask> split_breasts(const BinaryMask& mask) {
  const Dims d = mask.dims();
  std::size_t lo = std::numeric_limits<std::size_t>::max(), hi = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const std::size_t x = i % d.nx;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (lo > hi) throw DegenerateInput("split_breasts: empty mask");
  const double mid = 0.5 * static_cast<double>(lo + hi + 1);
  BinaryMask left(d, mask.spacing(), 0), right(d, mask.spacing(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    if (static_cast<double>(i % d.nx) < mid) {
      left[i] = 1;
    } else {
      right[i] = 1;
    }
  }
  return {std::move(left), std::move(right)};
}

BinaryMask fat_mask(const Volume3D& t1, const BinaryMask& breast) {
  require_same_geometry(t1, breast, "fat_mask");
  if (count(breast) == 0) throw DegenerateInput("fat_mask: empty breast mask");
  const double th = otsu_threshold(t1, breast);
  BinaryMask out(t1.dims(), t1.spacing(), 0);
  for (std::size_t i = 0; i < t1.size(); ++i) out[i] = (breast[i] && t1[i] >= th) ? 1 : 0;
  return out;
}

Volume3D normalize_to_fat(const Volume3D& v, const BinaryMask& fat) {
  require_same_geometry(v, fat, "normalize_to_fat");
  if (count(fat) == 0) throw DegenerateInput("normalize_to_fat: empty fat mask");
  const double mean = masked_mean(v, fat);
  if (!(mean > 0.0)) throw DegenerateInput("normalize_to_fat: fat mean intensity is not positive");
  Volume3D out = v;
  for (double& x : out.storage()) x /= mean;
  return out;
}

}  // namespace siftcad
