#include "siftcad/nrrd.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace siftcad {
namespace {

namespace fs = std::filesystem;

struct Header {
  std::map<std::string, std::string> fields;
  std::streamoff data_offset = 0;
};

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

Header read_header(std::istream& in, const fs::path& path) {
  std::string magic;
  if (!std::getline(in, magic)) throw FormatError("nrrd: empty file " + path.string());
  if (magic.rfind("NRRD", 0) != 0) throw FormatError("nrrd: missing NRRD magic in " + path.string());

  Header h;
  std::string line;
  bool terminated = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      terminated = true;
      break;
    }
    if (line[0] == '#') continue;
    // key:=value pairs carry free-form metadata only.
    if (line.find(":=") != std::string::npos) continue;
    const auto colon = line.find(": ");
    if (colon == std::string::npos) throw FormatError("nrrd: malformed header line '" + line + "'");
    h.fields[lower(trim(line.substr(0, colon)))] = trim(line.substr(colon + 2));
  }
  if (!terminated && h.fields.find("data file") == h.fields.end() && h.fields.find("datafile") == h.fields.end()) {
    throw FormatError("nrrd: header not terminated by a blank line in " + path.string());
  }
  h.data_offset = in.tellg();
  return h;
}

const std::string& require_field(const Header& h, const std::string& key) {
  auto it = h.fields.find(key);
  if (it == h.fields.end()) throw FormatError("nrrd: missing required field '" + key + "'");
  return it->second;
}

struct ScalarFormat {
  std::size_t bytes;
  bool is_float;
  bool is_signed;
};

ScalarFormat parse_type(std::string t) {
  t = lower(t);
  if (t == "uchar" || t == "unsigned char" || t == "uint8" || t == "uint8_t") return {1, false, false};
  if (t == "signed char" || t == "int8" || t == "int8_t") return {1, false, true};
  if (t == "ushort" || t == "unsigned short" || t == "unsigned short int" || t == "uint16" || t == "uint16_t")
    return {2, false, false};
  if (t == "short" || t == "short int" || t == "signed short" || t == "signed short int" || t == "int16" ||
      t == "int16_t")
    return {2, false, true};
  if (t == "uint" || t == "unsigned int" || t == "uint32" || t == "uint32_t") return {4, false, false};
  if (t == "int" || t == "signed int" || t == "int32" || t == "int32_t") return {4, false, true};
  if (t == "float") return {4, true, true};
  if (t == "double") return {8, true, true};
  throw FormatError("nrrd: unsupported type '" + t + "'");
}

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    if (lower(tok) == "nan") {
      out.push_back(std::nan(""));
      continue;
    }
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw FormatError("nrrd: bad number '" + tok + "'");
    }
  }
  return out;
}

Spacing parse_spacing(const Header& h) {
  if (auto it = h.fields.find("spacings"); it != h.fields.end()) {
    auto v = parse_numbers(it->second);
    if (v.size() != 3 || std::any_of(v.begin(), v.end(), [](double s) { return !(s > 0.0); })) {
      throw FormatError("nrrd: field 'spacings' must hold 3 positive values");
    }
    return {v[0], v[1], v[2]};
  }
  if (auto it = h.fields.find("space directions"); it != h.fields.end()) {
    std::string s = it->second;
    std::replace_if(s.begin(), s.end(), [](char c) { return c == '(' || c == ')' || c == ','; }, ' ');
    auto v = parse_numbers(s);
    if (v.size() != 9) throw FormatError("nrrd: field 'space directions' must hold three 3-vectors");
    Spacing sp;
    double* out[3] = {&sp.x, &sp.y, &sp.z};
    for (int a = 0; a < 3; ++a) {
      *out[a] = std::sqrt(v[3 * a] * v[3 * a] + v[3 * a + 1] * v[3 * a + 1] + v[3 * a + 2] * v[3 * a + 2]);
      if (!(*out[a] > 0.0)) throw FormatError("nrrd: zero-length space direction");
    }
    return sp;
  }
  throw FormatError("nrrd: missing spacing field 'spacings'");
}

double decode_sample(const unsigned char* p, const ScalarFormat& f, bool swap) {
  unsigned char buf[8];
  std::memcpy(buf, p, f.bytes);
  if (swap) std::reverse(buf, buf + f.bytes);
  if (f.is_float) {
    if (f.bytes == 4) {
      float x;
      std::memcpy(&x, buf, 4);
      return x;
    }
    double x;
    std::memcpy(&x, buf, 8);
    return x;
  }
  switch (f.bytes) {
    case 1:
      return f.is_signed ? static_cast<double>(static_cast<std::int8_t>(buf[0])) : static_cast<double>(buf[0]);
    case 2: {
      std::uint16_t u;
      std::memcpy(&u, buf, 2);
      return f.is_signed ? static_cast<double>(static_cast<std::int16_t>(u)) : static_cast<double>(u);
    }
    default: {
      std::uint32_t u;
      std::memcpy(&u, buf, 4);
      return f.is_signed ? static_cast<double>(static_cast<std::int32_t>(u)) : static_cast<double>(u);
    }
  }
}

struct Decoded {
  Dims dims;
  Spacing spacing;
  std::vector<double> data;
};

Decoded decode(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("nrrd: cannot open " + path.string());
  Header h = read_header(in, path);

  const auto dim = parse_numbers(require_field(h, "dimension"));
  if (dim.size() != 1 || dim[0] != 3.0) {
    throw FormatError("nrrd: dimension must be 3, got '" + require_field(h, "dimension") + "'");
  }
  const auto sizes = parse_numbers(require_field(h, "sizes"));
  if (sizes.size() != 3) throw FormatError("nrrd: field 'sizes' must hold 3 values");
  for (double s : sizes) {
    if (!(s >= 1.0) || s != std::floor(s)) throw FormatError("nrrd: bad value in 'sizes'");
  }
  const ScalarFormat fmt = parse_type(require_field(h, "type"));
  std::string encoding = "raw";
  if (auto it = h.fields.find("encoding"); it != h.fields.end()) encoding = lower(it->second);
  if (encoding != "raw") throw FormatError("nrrd: only raw encoding is supported, got '" + encoding + "'");
  bool big_endian = false;
  if (auto it = h.fields.find("endian"); it != h.fields.end()) big_endian = lower(it->second) == "big";
  const bool swap = fmt.bytes > 1 && (big_endian != (std::endian::native == std::endian::big));

  Decoded d;
  d.dims = {static_cast<std::size_t>(sizes[0]), static_cast<std::size_t>(sizes[1]),
            static_cast<std::size_t>(sizes[2])};
  d.spacing = parse_spacing(h);

  const std::size_t n = d.dims.count();
  std::vector<unsigned char> bytes(n * fmt.bytes);

  auto data_file = h.fields.find("data file");
  if (data_file == h.fields.end()) data_file = h.fields.find("datafile");
  if (data_file != h.fields.end()) {
    fs::path raw = data_file->second;
    if (raw.is_relative()) raw = path.parent_path() / raw;
    std::ifstream rin(raw, std::ios::binary);
    if (!rin) throw IoError("nrrd: cannot open data file " + raw.string());
    rin.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (rin.gcount() != static_cast<std::streamsize>(bytes.size())) {
      throw FormatError("nrrd: data file too short: " + raw.string());
    }
  } else {
    in.clear();
    in.seekg(h.data_offset);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
      throw FormatError("nrrd: attached data too short in " + path.string());
    }
  }

  d.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.data[i] = decode_sample(bytes.data() + i * fmt.bytes, fmt, swap);
  return d;
}

const char* type_name(NrrdType t) {
  switch (t) {
    case NrrdType::UInt8:
      return "uint8";
    case NrrdType::UInt16:
      return "uint16";
    case NrrdType::Float32:
      return "float";
    case NrrdType::Float64:
      return "double";
  }
  return "uint16";
}

std::vector<unsigned char> encode(std::span<const double> data, NrrdType type) {
  std::vector<unsigned char> out;
  auto check_int = [](double v, double hi) {
    const double r = std::nearbyint(v);
    if (!(r >= 0.0 && r <= hi)) throw InvalidArgument("nrrd: sample out of range for integer type");
    return r;
  };
  // Samples are written little-endian regardless of host order.
  auto put = [&out](const void* p, std::size_t bytes) {
    unsigned char buf[8];
    std::memcpy(buf, p, bytes);
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + bytes);
    out.insert(out.end(), buf, buf + bytes);
  };
  switch (type) {
    case NrrdType::UInt8:
      out.reserve(data.size());
      for (double v : data) out.push_back(static_cast<unsigned char>(check_int(v, 255.0)));
      break;
    case NrrdType::UInt16:
      out.reserve(data.size() * 2);
      for (double v : data) {
        const auto u = static_cast<std::uint16_t>(check_int(v, 65535.0));
        put(&u, 2);
      }
      break;
    case NrrdType::Float32:
      out.reserve(data.size() * 4);
      for (double v : data) {
        const auto f = static_cast<float>(v);
        put(&f, 4);
      }
      break;
    case NrrdType::Float64:
      out.reserve(data.size() * 8);
      for (double v : data) put(&v, 8);
      break;
  }
  return out;
}

void write(std::span<const double> data, Dims dims, Spacing sp, NrrdType type, const fs::path& path) {
  const bool detached = path.extension() == ".nhdr";
  std::ostringstream hdr;
  hdr.precision(17);
  hdr << "NRRD0004\n"
      << "type: " << type_name(type) << "\n"
      << "dimension: 3\n"
      << "sizes: " << dims.nx << " " << dims.ny << " " << dims.nz << "\n"
      << "spacings: " << sp.x << " " << sp.y << " " << sp.z << "\n"
      << "encoding: raw\n";
  if (type != NrrdType::UInt8) hdr << "endian: little\n";
  const auto payload = encode(data, type);

  if (detached) {
    fs::path raw = path;
    raw.replace_extension(".raw");
    hdr << "data file: " << raw.filename().string() << "\n";
    std::ofstream h(path, std::ios::binary);
    if (!h) throw IoError("nrrd: cannot write " + path.string());
    h << hdr.str();
    std::ofstream r(raw, std::ios::binary);
    if (!r) throw IoError("nrrd: cannot write " + raw.string());
    r.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (!h || !r) throw IoError("nrrd: write failed for " + path.string());
    return;
  }
  hdr << "\n";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("nrrd: cannot write " + path.string());
  out << hdr.str();
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("nrrd: write failed for " + path.string());
}

}  // namespace

Volume3D load_volume(const std::filesystem::path& path) {
  if (!fs::exists(path)) throw IoError("nrrd: no such file " + path.string());
  Decoded d = decode(path);
  return Volume3D(d.dims, d.spacing, std::move(d.data));
}

void save_volume(const Volume3D& v, const std::filesystem::path& path, NrrdType type) {
  write(v.data(), v.dims(), v.spacing(), type, path);
}

BinaryMask load_mask(const std::filesystem::path& path) {
  if (!fs::exists(path)) throw IoError("nrrd: no such file " + path.string());
  Decoded d = decode(path);
  std::vector<std::uint8_t> bits(d.data.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = d.data[i] != 0.0 ? 1 : 0;
  return BinaryMask(d.dims, d.spacing, std::move(bits));
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  std::vector<double> data(mask.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = mask[i] ? 1.0 : 0.0;
  write(data, mask.dims(), mask.spacing(), NrrdType::UInt8, path);
}

}  // namespace siftcad
