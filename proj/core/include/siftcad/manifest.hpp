#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "siftcad/breast_case.hpp"

namespace siftcad {

struct LesionEntry {
  std::string mask;
  bool malignant = false;
  double diameter_mm = 0.0;  ///< informative only; 0 when unknown
  std::string shape;         ///< informative only
};

/// One case in a dataset manifest. Paths are relative to the manifest's
/// directory unless absolute. Masks left empty are derived on load.
struct CaseEntry {
  std::string id;
  std::string patient_id;
  std::string side = "left";
  std::string split = "train";
  std::string t1;
  std::string t2;
  std::vector<std::string> dce;
  std::vector<double> acquisition_times;
  std::string breast_mask;
  std::string fat_mask;
  std::vector<LesionEntry> lesions;
};

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<CaseEntry> cases;

  std::vector<const CaseEntry*> split(const std::string& name) const;
  /// `p` relative to base_dir unless absolute.
  std::filesystem::path resolve(const std::string& p) const;
};

Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& m, const std::filesystem::path& path);

/// Reads every volume of a case. A missing breast mask is computed from T1;
/// a missing fat mask from T1 within the breast.
BreastCase load_case(const Manifest& m, const CaseEntry& entry);

/// Writes the case volumes under `dir` (relative to the manifest base) and
/// returns the entry describing them.
CaseEntry save_case(const BreastCase& c, const std::filesystem::path& base_dir, const std::string& subdir,
                    const std::string& split);

}  // namespace siftcad
