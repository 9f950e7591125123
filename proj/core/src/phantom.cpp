#include "siftcad/phantom.hpp"

#include <algorithm>
#include <cmath>

#include "siftcad/rng.hpp"
#include "siftcad/sifting.hpp"

namespace siftcad {
namespace {

using Vec3 = std::array<double, 3>;

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 add_scaled(const Vec3& a, const Vec3& u, double s) { return {a[0] + s * u[0], a[1] + s * u[1], a[2] + s * u[2]}; }
Vec3 normalized(Vec3 v) {
  const double n = std::sqrt(dot(v, v));
  return {v[0] / n, v[1] / n, v[2] / n};
}

Vec3 random_direction(Rng& rng) {
  for (;;) {
    const Vec3 v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double n2 = dot(v, v);
    if (n2 > 1e-6 && n2 <= 1.0) return normalized(v);
  }
}

// Spheroid with symmetry axis u: semi-axis a along u, b across.
struct Spheroid {
  Vec3 c;
  Vec3 u{1, 0, 0};
  double a = 1.0;
  double b = 1.0;

  bool contains(const Vec3& p, double grow = 0.0) const {
    const Vec3 d = sub(p, c);
    const double along = dot(d, u);
    const double perp2 = std::max(0.0, dot(d, d) - along * along);
    const double aa = a + grow, bb = b + grow;
    return along * along / (aa * aa) + perp2 / (bb * bb) <= 1.0;
  }
  double reach() const { return std::max(a, b); }
};

std::vector<Spheroid> lesion_parts(const LesionSpec& l) {
  Rng rng(mix_seed(l.shape_seed, 17));
  const Vec3 c = l.center_mm;
  const double D = l.diameter_mm;
  std::vector<Spheroid> parts;
  switch (l.shape) {
    case LesionShape::Ball:
      parts.push_back({c, {1, 0, 0}, D / 2, D / 2});
      break;
    case LesionShape::Lobulated: {
      const double core = 0.36 * D;
      parts.push_back({c, {1, 0, 0}, core, core});
      const int lobes = 3 + static_cast<int>(rng.below(3));
      for (int i = 0; i < lobes; ++i) {
        const double r = rng.uniform(0.17, 0.22) * D;
        const Vec3 dir = random_direction(rng);
        parts.push_back({add_scaled(c, dir, 0.5 * D - r), {1, 0, 0}, r, r});
      }
      break;
    }
    case LesionShape::Segmental: {
      // Beads along a gently bent path of length ~D through the centre.
      const int beads = 3 + static_cast<int>(rng.below(4));
      const Vec3 u = random_direction(rng);
      Vec3 w = random_direction(rng);
      const double proj = dot(w, u);
      w = normalized(add_scaled(w, u, -proj));
      const double bend = rng.uniform(0.05, 0.15) * D;
      const double b = std::max(1.6, 0.13 * D);
      const double a = std::max(b, 0.5 * D / beads * 1.35);
      for (int i = 0; i < beads; ++i) {
        const double s = beads == 1 ? 0.0 : -0.5 + static_cast<double>(i) / (beads - 1);
        const double along = s * (D - 2 * a);
        const double off = bend * (1.0 - 4.0 * s * s);
        const Vec3 p = add_scaled(add_scaled(c, u, along), w, off);
        const Vec3 tangent = normalized(add_scaled(u, w, -8.0 * s * bend / std::max(1e-9, D - 2 * a)));
        parts.push_back({p, tangent, a, b * rng.uniform(0.85, 1.15)});
      }
      break;
    }
  }
  return parts;
}

bool in_parts(const std::vector<Spheroid>& parts, const Vec3& p, double grow = 0.0) {
  for (const auto& s : parts) {
    if (s.contains(p, grow)) return true;
  }
  return false;
}

struct BreastGeometry {
  Vec3 center;  // centre of the chest-wall ellipse
  Vec3 axes;    // semi-axes; y points from chest wall toward the nipple (decreasing y)
  double chest_y;

  explicit BreastGeometry(Dims d, Spacing s) {
    const double X = d.nx * s.x, Y = d.ny * s.y, Z = d.nz * s.z;
    chest_y = Y - 6.0 * s.y;
    center = {X / 2, chest_y, Z / 2};
    axes = {0.44 * X, chest_y - 5.0 * s.y, 0.44 * Z};
  }
  // Normalized ellipsoidal radius; > 1 outside. Behind the chest wall is outside.
  double radius(const Vec3& p) const {
    if (p[1] > chest_y) return 2.0;
    const double x = (p[0] - center[0]) / axes[0];
    const double y = (chest_y - p[1]) / axes[1];
    const double z = (p[2] - center[2]) / axes[2];
    return std::sqrt(x * x + y * y + z * z);
  }
};

Vec3 voxel_mm(std::size_t x, std::size_t y, std::size_t z, Spacing s) { return {x * s.x, y * s.y, z * s.z}; }

// Band-limited texture: Gaussian lattice values, trilinear interpolation.
class SmoothNoise {
 public:
  SmoothNoise(Rng& rng, Vec3 extent, double cell) : cell_(cell) {
    for (std::size_t a = 0; a < 3; ++a) n_[a] = static_cast<std::size_t>(std::ceil(extent[a] / cell)) + 2;
    v_.resize(n_[0] * n_[1] * n_[2]);
    for (double& x : v_) x = rng.normal();
  }
  double operator()(const Vec3& p) const {
    std::array<std::size_t, 3> i{};
    std::array<double, 3> f{};
    for (std::size_t a = 0; a < 3; ++a) {
      const double q = std::max(0.0, p[a] / cell_);
      i[a] = std::min(static_cast<std::size_t>(q), n_[a] - 2);
      f[a] = std::min(1.0, q - static_cast<double>(i[a]));
    }
    double acc = 0.0;
    for (int c = 0; c < 8; ++c) {
      const std::size_t dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
      const double w = (dx ? f[0] : 1 - f[0]) * (dy ? f[1] : 1 - f[1]) * (dz ? f[2] : 1 - f[2]);
      acc += w * v_[(i[0] + dx) + n_[0] * ((i[1] + dy) + n_[1] * (i[2] + dz))];
    }
    return acc;
  }

 private:
  double cell_;
  std::array<std::size_t, 3> n_{};
  std::vector<double> v_;
};

struct Tissue {
  double t1, t2, dce0;
};
constexpr Tissue kFat{900, 120, 60};
constexpr Tissue kGland{350, 250, 180};
constexpr double kLesionT1 = 380, kLesionDce0 = 170;
constexpr double kMalignantT2 = 280, kBenignT2 = 420, kRimT2 = 650;

struct Clutter {
  std::vector<Spheroid> parts;
  double amplitude;
  double tau;
  double t2;
};

}  // namespace

const char* shape_name(LesionShape s) {
  switch (s) {
    case LesionShape::Ball:
      return "ball";
    case LesionShape::Lobulated:
      return "lobulated";
    case LesionShape::Segmental:
      return "segmental";
  }
  return "ball";
}

double kinetic_curve(KineticClass k, double t) {
  if (t <= 0.0) return 0.0;
  if (k == KineticClass::MalignantWashout) return 1.6 * (1.0 - std::exp(-t / 40.0)) * std::exp(-1.2e-3 * t);
  return 1.5 * (1.0 - std::exp(-t / 180.0));
}

BinaryMask phantom_breast(Dims dims, Spacing spacing) {
  const BreastGeometry g(dims, spacing);
  BinaryMask m(dims, spacing, 0);
  for (std::size_t z = 0; z < dims.nz; ++z)
    for (std::size_t y = 0; y < dims.ny; ++y)
      for (std::size_t x = 0; x < dims.nx; ++x) m(x, y, z) = g.radius(voxel_mm(x, y, z, spacing)) <= 1.0;
  return m;
}

BinaryMask voxelize_lesion(const LesionSpec& l, Dims dims, Spacing spacing) {
  const auto parts = lesion_parts(l);
  BinaryMask m(dims, spacing, 0);
  const double r = 0.5 * l.diameter_mm + 1.0;
  std::array<std::size_t, 3> lo{}, hi{};
  for (std::size_t a = 0; a < 3; ++a) {
    const double s = spacing[a];
    lo[a] = static_cast<std::size_t>(std::max(0.0, std::floor((l.center_mm[a] - r) / s)));
    hi[a] = static_cast<std::size_t>(std::clamp(std::ceil((l.center_mm[a] + r) / s), 0.0, dims[a] - 1.0));
  }
  for (std::size_t z = lo[2]; z <= hi[2]; ++z)
    for (std::size_t y = lo[1]; y <= hi[1]; ++y)
      for (std::size_t x = lo[0]; x <= hi[0]; ++x) m(x, y, z) = in_parts(parts, voxel_mm(x, y, z, spacing));
  return m;
}

PhantomCase generate_case(const PhantomSpec& spec, const std::string& id) {
  if (spec.times.size() < 2) throw InvalidArgument("phantom: need at least 2 DCE time points");
  const Dims d = spec.dims;
  const Spacing sp = spec.spacing;
  const BreastGeometry geo(d, sp);
  Rng rng(spec.seed);
  const Vec3 extent{d.nx * sp.x, d.ny * sp.y, d.nz * sp.z};

  PhantomCase out;
  out.lesions = spec.lesions;
  BreastCase& c = out.breast_case;
  c.id = id;
  c.patient_id = id;
  c.side = spec.side;
  c.acquisition_times = spec.times;
  c.breast_mask = phantom_breast(d, sp);

  std::vector<std::vector<Spheroid>> lesion_shapes;
  for (const auto& l : spec.lesions) {
    lesion_shapes.push_back(lesion_parts(l));
    BinaryMask gt = voxelize_lesion(l, d, sp);
    if (count(gt) == 0) throw InvalidArgument("phantom: lesion " + std::to_string(c.ground_truth.size()) +
                                              " has no voxels");
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (gt[i] && !c.breast_mask[i]) throw InvalidArgument("phantom: lesion outside the breast");
    }
    c.ground_truth.push_back(std::move(gt));
    c.malignant.push_back(l.kinetics == KineticClass::MalignantWashout);
    // Reference volume by 4x supersampling of the analytic shape.
    double vol = 0.0;
    const double step = 0.25;
    const double r = 0.5 * l.diameter_mm + 1.0;
    const double cell = sp.x * step * sp.y * step * sp.z * step;
    for (double z = l.center_mm[2] - r; z <= l.center_mm[2] + r; z += sp.z * step)
      for (double y = l.center_mm[1] - r; y <= l.center_mm[1] + r; y += sp.y * step)
        for (double x = l.center_mm[0] - r; x <= l.center_mm[0] + r; x += sp.x * step)
          if (in_parts(lesion_shapes.back(), {x, y, z})) vol += cell;
    out.analytic_volume.push_back(l.shape == LesionShape::Ball ? sphere_volume(l.diameter_mm) : vol);
  }

  // Background texture and enhancement fields.
  SmoothNoise gland_a(rng, extent, 14.0), gland_b(rng, extent, 6.0), bpe_field(rng, extent, 20.0);

  // Clutter: enhancing foci and vessels, kept clear of the lesions.
  std::vector<Clutter> clutter;
  auto clear_of_lesions = [&](const Vec3& p, double margin) {
    for (const auto& l : spec.lesions) {
      const Vec3 dlt = sub(p, l.center_mm);
      if (std::sqrt(dot(dlt, dlt)) < 0.5 * l.diameter_mm + margin) return false;
    }
    return true;
  };
  for (int i = 0, tries = 0; i < spec.foci && tries < 1000; ++tries) {
    const Vec3 p{rng.uniform(0, extent[0]), rng.uniform(0, extent[1]), rng.uniform(0, extent[2])};
    const double diam = rng.uniform(2.5, 5.0);
    if (geo.radius(p) > 0.75 || !clear_of_lesions(p, diam + 4.0)) continue;
    clutter.push_back({{{p, {1, 0, 0}, diam / 2, diam / 2}}, rng.uniform(0.5, 1.1), rng.uniform(30.0, 200.0), 0.0});
    ++i;
  }
  for (int i = 0, tries = 0; i < spec.vessels && tries < 1000; ++tries) {
    const Vec3 p{rng.uniform(0, extent[0]), rng.uniform(0, extent[1]), rng.uniform(0, extent[2])};
    if (geo.radius(p) > 0.7) continue;
    Vec3 u = random_direction(rng);
    u[2] *= 0.3;  // vessels mostly run in-plane
    u = normalized(u);
    const double len = rng.uniform(40.0, 80.0), rad = rng.uniform(0.8, 1.3);
    Clutter v{{}, rng.uniform(0.9, 1.3), 25.0, 200.0};
    bool ok = true;
    for (double s = -len / 2; s <= len / 2 && ok; s += rad) {
      const Vec3 q = add_scaled(p, u, s);
      ok = clear_of_lesions(q, 4.0);
      v.parts.push_back({q, u, rad * 1.5, rad});
    }
    if (!ok) continue;
    clutter.push_back(std::move(v));
    ++i;
  }

  const std::size_t nt = spec.times.size();
  c.t1 = Volume3D(d, sp, 0.0);
  c.t2 = Volume3D(d, sp, 0.0);
  c.dce.assign(nt, Volume3D(d, sp, 0.0));
  out.fat_truth = BinaryMask(d, sp, 0);
  std::vector<double> lesion_e(spec.lesions.size() * nt);
  for (std::size_t k = 0; k < spec.lesions.size(); ++k)
    for (std::size_t i = 0; i < nt; ++i) lesion_e[k * nt + i] = kinetic_curve(spec.lesions[k].kinetics, spec.times[i]);

  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        const std::size_t idx = c.t1.index(x, y, z);
        if (!c.breast_mask[idx]) continue;
        const Vec3 p = voxel_mm(x, y, z, sp);
        const double r = geo.radius(p);
        // Subcutaneous and retromammary fat, textured gland/fat mix inside.
        double gland = 0.0;
        if (r < 0.85 && geo.chest_y - p[1] > 8.0) {
          if (spec.gland_texture) {
            const double score = gland_a(p) + 0.5 * gland_b(p) + 1.6 * (0.7 - r);
            gland = std::clamp(0.5 + 1.5 * score, 0.0, 1.0);
          } else {
            gland = 1.0;
          }
        }
        out.fat_truth[idx] = gland < 0.5;
        double t1 = gland * kGland.t1 + (1 - gland) * kFat.t1;
        double t2 = gland * kGland.t2 + (1 - gland) * kFat.t2;
        const double dce0 = gland * kGland.dce0 + (1 - gland) * kFat.dce0;
        const double bpe = spec.bpe_max * std::clamp(0.5 + 0.35 * bpe_field(p), 0.0, 1.0) * gland;

        int lesion = -1;
        for (std::size_t k = 0; k < spec.lesions.size(); ++k) {
          if (c.ground_truth[k][idx]) {
            lesion = static_cast<int>(k);
            break;
          }
        }
        const Clutter* cl = nullptr;
        if (lesion < 0) {
          for (const auto& q : clutter) {
            if (in_parts(q.parts, p)) {
              cl = &q;
              break;
            }
          }
        }
        if (lesion >= 0) {
          const auto& l = spec.lesions[static_cast<std::size_t>(lesion)];
          t1 = kLesionT1;
          t2 = l.kinetics == KineticClass::MalignantWashout ? kMalignantT2 : kBenignT2;
          c.t1[idx] = t1;
          c.t2[idx] = t2;
          for (std::size_t i = 0; i < nt; ++i) {
            c.dce[i][idx] = kLesionDce0 * (1.0 + lesion_e[static_cast<std::size_t>(lesion) * nt + i]);
          }
          continue;
        }
        for (std::size_t k = 0; k < spec.lesions.size(); ++k) {
          const auto& l = spec.lesions[k];
          if (l.rim && in_parts(lesion_shapes[k], p, 2.0)) t2 = kRimT2;
        }
        c.t1[idx] = t1;
        c.t2[idx] = cl && cl->t2 > 0.0 ? cl->t2 : t2;
        for (std::size_t i = 0; i < nt; ++i) {
          const double t = spec.times[i];
          double e = bpe * (1.0 - std::exp(-t / 300.0)) + 0.02 * (1.0 - gland) * (t > 0 ? 1.0 : 0.0);
          double base = dce0;
          if (cl) {
            e = cl->amplitude * (1.0 - std::exp(-t / cl->tau));
            base = std::max(dce0, 150.0);
          }
          c.dce[i][idx] = base * (1.0 + e);
        }
      }
    }
  }

  // Acquisition noise (magnitude images stay non-negative).
  auto finish = [&](Volume3D& v) {
    for (double& x : v.storage()) {
      if (spec.noise_sigma > 0.0) x += rng.normal(0.0, spec.noise_sigma);
      x = std::max(0.0, x);
      if (spec.quantize) x = std::min(65535.0, std::round(x));
    }
  };
  finish(c.t1);
  finish(c.t2);
  for (auto& f : c.dce) finish(f);

  c.fat_mask = fat_mask(c.t1, c.breast_mask);
  c.validate();
  return out;
}

std::vector<SuiteCase> plan_suite(const SuiteSpec& s) {
  if (s.n_cases < 1) throw InvalidArgument("phantom suite: need at least one case");
  if (!(s.d_min > 0.0) || !(s.d_min <= s.d_max)) throw InvalidArgument("phantom suite: bad diameter range");
  Rng rng(mix_seed(s.seed, 0));
  std::vector<std::size_t> per_case(s.n_cases);
  std::size_t total = 0;
  for (auto& n : per_case) {
    n = rng.uniform() < 0.5 ? 2 : 1;
    total += n;
  }
  // Stratified log-uniform diameters, shuffled.
  std::vector<double> diam(total);
  for (std::size_t i = 0; i < total; ++i) {
    const double u = (static_cast<double>(i) + rng.uniform()) / static_cast<double>(total);
    diam[i] = s.d_min * std::pow(s.d_max / s.d_min, u);
  }
  std::shuffle(diam.begin(), diam.end(), rng.engine());

  std::vector<SuiteCase> cases;
  std::vector<LesionSpec*> placed;
  std::size_t next = 0;
  const std::size_t n_train = static_cast<std::size_t>(std::lround(s.train_fraction * s.n_cases));
  for (std::size_t ci = 0; ci < s.n_cases; ++ci) {
    SuiteCase sc;
    sc.id = "case" + std::string(ci < 10 ? "00" : ci < 100 ? "0" : "") + std::to_string(ci);
    sc.split = ci < n_train ? "train" : "test";
    PhantomSpec& ps = sc.spec;
    ps.seed = mix_seed(s.seed, 1000 + ci);
    ps.noise_sigma = s.noise_sigma;
    ps.side = ci % 2 == 0 ? Side::Left : Side::Right;
    double largest = 0.0;
    for (std::size_t k = 0; k < per_case[ci]; ++k) largest = std::max(largest, diam[next + k]);
    if (largest > 40.0) ps.dims = {160, 160, 80};
    const BreastGeometry geo(ps.dims, ps.spacing);
    Rng place(mix_seed(ps.seed, 5));
    for (std::size_t k = 0; k < per_case[ci]; ++k) {
      LesionSpec l;
      l.diameter_mm = diam[next++];
      l.shape_seed = mix_seed(ps.seed, 100 + k);
      const double u = place.uniform();
      if (l.diameter_mm >= 12.0 && u < 0.25) {
        l.shape = LesionShape::Segmental;
      } else if (u < 0.6) {
        l.shape = LesionShape::Lobulated;
      } else {
        l.shape = LesionShape::Ball;
      }
      bool ok = false;
      for (int tries = 0; tries < 2000 && !ok; ++tries) {
        const double reach = 0.5 * l.diameter_mm + 4.0;
        Vec3 p{};
        for (std::size_t a = 0; a < 3; ++a) p[a] = geo.center[a] + place.uniform(-1, 1) * geo.axes[a];
        p[1] = geo.chest_y - place.uniform(0.15, 0.75) * geo.axes[1];
        // Whole lesion plus margin inside the breast.
        bool inside = true;
        for (const Vec3& dlt : std::array<Vec3, 6>{Vec3{reach, 0, 0}, Vec3{-reach, 0, 0}, Vec3{0, reach, 0},
                                                   Vec3{0, -reach, 0}, Vec3{0, 0, reach}, Vec3{0, 0, -reach}}) {
          inside = inside && geo.radius(add_scaled(p, dlt, 1.0)) < 0.92;
        }
        if (!inside) continue;
        bool apart = true;
        for (const auto& o : ps.lesions) {
          const Vec3 dd = sub(p, o.center_mm);
          apart = apart && std::sqrt(dot(dd, dd)) > 0.5 * (l.diameter_mm + o.diameter_mm) + 10.0;
        }
        if (!apart) continue;
        l.center_mm = p;
        ok = true;
      }
      if (ok) ps.lesions.push_back(l);
    }
    cases.push_back(std::move(sc));
  }
  // Malignant : benign = 2 : 1 over all placed lesions.
  std::vector<LesionSpec*> all;
  for (auto& sc : cases)
    for (auto& l : sc.spec.lesions) all.push_back(&l);
  std::vector<bool> malignant(all.size(), false);
  const std::size_t n_mal = static_cast<std::size_t>(std::lround(2.0 * static_cast<double>(all.size()) / 3.0));
  for (std::size_t i = 0; i < n_mal; ++i) malignant[i] = true;
  std::shuffle(malignant.begin(), malignant.end(), rng.engine());
  for (std::size_t i = 0; i < all.size(); ++i) {
    all[i]->kinetics = malignant[i] ? KineticClass::MalignantWashout : KineticClass::BenignPersistent;
    all[i]->rim = malignant[i] && rng.uniform() < 0.5;
  }
  return cases;
}

Manifest write_suite(const SuiteSpec& s, const std::filesystem::path& dir) {
  Manifest m;
  m.base_dir = dir;
  for (const auto& sc : plan_suite(s)) {
    const PhantomCase pc = generate_case(sc.spec, sc.id);
    CaseEntry e = save_case(pc.breast_case, dir, sc.id, sc.split);
    for (std::size_t k = 0; k < pc.lesions.size(); ++k) {
      e.lesions[k].diameter_mm = pc.lesions[k].diameter_mm;
      e.lesions[k].shape = shape_name(pc.lesions[k].shape);
    }
    m.cases.push_back(std::move(e));
  }
  save_manifest(m, dir / "manifest.json");
  return m;
}

}  // namespace siftcad
